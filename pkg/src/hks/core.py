"""Sample ingestion, pooling and rescaling shared by every statistic."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SampleFormatError(OSError):
    """Raised when a sample file cannot be parsed."""


class NumericalError(ArithmeticError):
    """Raised when a numerical routine cannot produce a trustworthy answer."""


def _as_sample(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"sample {name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"sample {name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TwoSamples:
    """Raw samples ``x`` (from P, size m) and ``y`` (from Q, size n)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_sample(self.x, "x"))
        object.__setattr__(self, "y", _as_sample(self.y, "y"))

    @property
    def m(self) -> int:
        return self.x.size

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def N(self) -> int:
        return self.x.size + self.y.size

    def swapped(self) -> "TwoSamples":
        return TwoSamples(self.y, self.x)

    def reflected(self) -> "TwoSamples":
        return TwoSamples(-self.x, -self.y)


@dataclass(frozen=True)
class PooledSample:
    """Sorted pooled sample with signed weights.

    ``z``/``c`` hold the knots with nonzero net weight.  ``points`` and
    ``point_weights`` keep every distinct pooled value, including values
    whose x and y contributions cancel; the grid statistic and the
    maximum-gap bound are defined over all sample points.
    """

    z: np.ndarray
    c: np.ndarray
    m: int
    n: int
    scale: float = 1.0
    points: np.ndarray = field(default=None, repr=False)
    point_weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.points is None:
            object.__setattr__(self, "points", self.z)
            object.__setattr__(self, "point_weights", self.c)


def pool_and_sort(s: TwoSamples) -> PooledSample:
    """Merge both samples into sorted distinct knots with weights.

    Each knot's weight is ``(#x at knot)/m - (#y at knot)/n``.  Knots whose
    weight is exactly zero are dropped from ``z``/``c``.
    """
    m, n = s.m, s.n
    values = np.concatenate([s.x, s.y])
    points, inverse = np.unique(values, return_inverse=True)
    # Sum x and y parts separately so each weight is an exact difference.
    wx = np.bincount(inverse[:m], minlength=points.size) / m
    wy = np.bincount(inverse[m:], minlength=points.size) / n
    weights = wx - wy
    keep = weights != 0.0
    return PooledSample(
        z=points[keep],
        c=weights[keep],
        m=m,
        n=n,
        scale=1.0,
        points=points,
        point_weights=weights,
    )


def rescale(p: PooledSample) -> PooledSample:
    """Divide all knots by ``s = max(1, max|z|)``; 0 stays at 0.

    An order-k statistic computed on the result must be multiplied by
    ``scale**k`` to be reported in the original units.
    """
    s = 1.0
    if p.points.size:
        s = max(1.0, float(np.max(np.abs(p.points))))
    s *= p.scale
    factor = s / p.scale
    return PooledSample(
        z=_divide_keep_sign(p.z, factor),
        c=p.c,
        m=p.m,
        n=p.n,
        scale=s,
        points=_divide_keep_sign(p.points, factor),
        point_weights=p.point_weights,
    )


def _divide_keep_sign(v: np.ndarray, factor: float) -> np.ndarray:
    # A subnormal that underflows to 0 would switch sides; pin it to the tiniest value instead.
    out = v / factor
    lost = (out == 0) & (v != 0)
    if lost.any():
        out[lost] = np.copysign(np.nextafter(0.0, 1.0), v[lost])
    return out


def _parse_float(text: str, path, lineno: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise SampleFormatError(
            f"{path}: line {lineno}: cannot parse {text.strip()!r} as a number"
        ) from None
    if not np.isfinite(v):
        raise SampleFormatError(f"{path}: line {lineno}: non-finite value {text.strip()!r}")
    return v


def read_column(path) -> np.ndarray:
    """Read one value per line; blank lines are skipped."""
    out = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            out.append(_parse_float(line, path, lineno))
    return np.array(out, dtype=float)


def read_labeled(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``sample,value`` CSV with labels ``x``/``y``."""
    xs, ys = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["sample", "value"]:
            raise SampleFormatError(f"{path}: line 1: expected header 'sample,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise SampleFormatError(f"{path}: line {lineno}: expected 2 columns, got {len(row)}")
            label = row[0].strip().lower()
            v = _parse_float(row[1], path, lineno)
            if label == "x":
                xs.append(v)
            elif label == "y":
                ys.append(v)
            else:
                raise SampleFormatError(f"{path}: line {lineno}: unknown label {row[0]!r}")
    return np.array(xs, dtype=float), np.array(ys, dtype=float)


def ingest_samples(path_x, path_y=None, format: str = "csv_one_col") -> TwoSamples:
    """Load two samples from disk.

    ``csv_one_col`` reads ``path_x`` and ``path_y`` as one value per line.
    ``csv_labeled`` reads a single labeled file given as ``path_x``; if
    ``path_y`` is also given, its rows are appended.
    """
    if format == "csv_one_col":
        if path_y is None:
            raise ValueError("csv_one_col needs both path_x and path_y")
        x, y = read_column(path_x), read_column(path_y)
    elif format == "csv_labeled":
        x, y = read_labeled(path_x)
        if path_y is not None:
            x2, y2 = read_labeled(path_y)
            x, y = np.concatenate([x, x2]), np.concatenate([y, y2])
    else:
        raise ValueError(f"unknown sample format {format!r}")
    for name, arr, path in (("x", x, path_x), ("y", y, path_y or path_x)):
        if arr.size == 0:
            raise ValueError(f"sample {name} read from {Path(path)} is empty")
    return TwoSamples(x, y)
