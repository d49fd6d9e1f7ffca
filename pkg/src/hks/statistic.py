"""Higher-order KS statistics (exact, grid, Wang variant) and classic KS.

All HKS variants funnel through :func:`statistic_batch`, which works on a
fixed set of sorted pooled points and a matrix of weight rows.  A single
two-sample statistic is one row; a permutation null is many rows over the
same points.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb, factorial
from typing import Optional

import numpy as np

from .core import TwoSamples, pool_and_sort, rescale
from .poly import (
    CLOSED_FORM_MAX_DEGREE,
    critical_points,
    derivative_coeffs,
    horner,
    piece_coefficients,
    roots_in_interval,
)

METHODS = ("exact", "grid", "wang")


@dataclass(frozen=True)
class HksConfig:
    """Order, method and tolerance for an HKS statistic.

    ``eps`` is only used by the exact method when ``order >= 6``; ``None``
    means ``1/N``.
    """

    order: int
    method: str = "exact"
    eps: Optional[float] = None

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 0:
            raise ValueError(f"order k must be a nonnegative integer, got {self.order}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("eps must be positive")

    def resolved_eps(self, N: int) -> float:
        return self.eps if self.eps is not None else 1.0 / N

    @property
    def tag(self) -> str:
        if self.method == "exact" and self.order >= 6:
            return "eps_approx"
        return self.method


@dataclass(frozen=True)
class TestResult:
    """Statistic plus the knot and side of the maximizing truncated power."""

    __test__ = False

    statistic: float
    order: int
    witness_knot: float
    witness_side: str
    witness_sign: int
    method: str
    p_value: Optional[float] = None
    m: Optional[int] = None
    n: Optional[int] = None

    def with_p_value(self, p: float) -> "TestResult":
        d = asdict(self)
        d["p_value"] = float(p)
        return TestResult(**d)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "k": self.order,
            "method": self.method,
            "witness": {"t": self.witness_knot, "side": self.witness_side, "sign": self.witness_sign},
            "p_value": self.p_value,
            "m": self.m,
            "n": self.n,
        }


def _select(vals: np.ndarray, ts: np.ndarray):
    """Row-wise max of ``|vals|``; exact ties go to the smallest ``|t|``."""
    a = np.abs(vals)
    a = np.where(np.isnan(a), -np.inf, a)
    best = a.max(axis=1)
    at_best = a == best[:, None]
    tt = np.where(at_best, np.abs(ts), np.inf)
    j = np.argmin(tt, axis=1)
    rows = np.arange(vals.shape[0])
    return best, ts[rows, j], np.where(vals[rows, j] < 0, -1, 1)


def _prune_bound(A, lo, hi):
    # |phi(t)| <= |phi(lo)| + (t - lo) * sum_l |d_l| hi**l on [lo, hi] with hi > 0.
    d = np.abs(derivative_coeffs(A))
    lip = horner(d, hi) if d.shape[-1] else np.zeros_like(lo)
    return np.maximum(np.abs(horner(A, lo)), np.abs(horner(A, hi))) + (hi - lo) * lip


def _side_max(z: np.ndarray, W: np.ndarray, k: int, method: str, eps: float):
    """Maximize over one side (knots ``z > 0`` sorted, weights ``W``)."""
    B = W.shape[0]
    if z.size == 0:
        return np.zeros(B), np.zeros(B), np.ones(B, dtype=int)
    A = piece_coefficients(z, W, k)
    K = z.size
    lo = np.concatenate([[0.0], z[:-1]])
    hi = z
    grid = horner(A, lo)
    if method == "grid" or k < 2:
        return _select(grid, np.broadcast_to(lo, grid.shape))

    if k - 1 <= CLOSED_FORM_MAX_DEGREE:
        dA = derivative_coeffs(A).reshape(B * K, k)
        roots = roots_in_interval(dA, np.tile(lo, B), np.tile(hi, B)).reshape(B, K, k - 1)
        inner = horner(A[:, :, None, :], np.where(np.isnan(roots), 0.0, roots))
        inner = np.where(np.isnan(roots), np.nan, inner)
        vals = np.concatenate([grid, inner.reshape(B, -1)], axis=1)
        ts = np.concatenate(
            [np.broadcast_to(lo, grid.shape), np.where(np.isnan(roots), np.inf, roots).reshape(B, -1)], axis=1
        )
        return _select(vals, ts)

    out_v = np.empty(B)
    out_t = np.empty(B)
    out_s = np.empty(B, dtype=int)
    for b in range(B):
        v, t, s = _select(grid[b : b + 1], lo[None, :])
        best, bt, bs = v[0], t[0], s[0]
        bound = _prune_bound(A[b], lo, hi)
        for i in np.argsort(-bound, kind="stable"):
            if bound[i] <= best:
                break
            cp = critical_points(A[b, i], lo[i], hi[i], eps)
            if cp.size == 0:
                continue
            cv = horner(A[b, i], cp)
            j = int(np.argmax(np.abs(cv)))
            if abs(cv[j]) > best or (abs(cv[j]) == best and abs(cp[j]) < abs(bt)):
                best, bt, bs = abs(cv[j]), cp[j], (-1 if cv[j] < 0 else 1)
        out_v[b], out_t[b], out_s[b] = best, bt, bs
    return out_v, out_t, out_s


def statistic_batch(points, W, k: int, method: str = "exact", eps: float = 1e-9):
    """HKS statistic for each weight row over fixed sorted ``points``.

    Returns ``(values, knots, sides, signs)`` in the units of ``points``;
    ``sides`` is +1 for the plus side and -1 for the minus side.
    """
    points = np.asarray(points, dtype=float)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if method == "wang":
        v, t, s = wang_batch(points, W, k)
        return v, t, np.ones_like(s), s
    pos = points > 0
    neg = points < 0
    vp, tp, sp = _side_max(points[pos], W[:, pos], k, method, eps)
    # g^-_t(x) = g^+_{-t}(-x): reflect the negative half and reuse the plus side.
    vm, tm, sm = _side_max(-points[neg][::-1], W[:, neg][:, ::-1], k, method, eps)
    plus = (vp > vm) | ((vp == vm) & (tp <= tm))
    return (
        np.where(plus, vp, vm),
        np.where(plus, tp, -tm) + 0.0,  # no negative zero knots
        np.where(plus, 1, -1),
        np.where(plus, sp, sm),
    )


def wang_batch(points, W, k: int):
    """Plus-side criterion evaluated at the sample points only."""
    points = np.asarray(points, dtype=float)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    B = W.shape[0]
    if points.size == 0:
        return np.zeros(B), np.zeros(B), np.ones(B, dtype=int)
    A = piece_coefficients(points, W, k)
    # At t = z_i only knots strictly to the right contribute: phi_{i+1}(z_i).
    nxt = np.concatenate([A[:, 1:, :], np.zeros((B, 1, k + 1))], axis=1)
    vals = horner(nxt, points)
    return _select(vals, np.broadcast_to(points, vals.shape))


def _check_order(k):
    if int(k) != k or k < 0:
        raise ValueError(f"order k must be a nonnegative integer, got {k}")
    return int(k)


def _original_knot(raw_points, points, t: float, scale: float) -> float:
    # Knots at data points map back exactly; t * scale may round off them.
    i = int(np.searchsorted(points, t))
    if i < points.size and points[i] == t:
        return float(raw_points[i])
    return float(t * scale)


def compute(s: TwoSamples, cfg: HksConfig) -> TestResult:
    """Dispatch on ``cfg.method``; values reported in original units."""
    k = cfg.order
    raw = pool_and_sort(s)
    p = rescale(raw)
    v, t, side, sign = statistic_batch(
        p.points, p.point_weights[None, :], k, cfg.method, cfg.resolved_eps(s.N)
    )
    return TestResult(
        statistic=float(v[0] * p.scale**k),
        order=k,
        witness_knot=_original_knot(raw.points, p.points, float(t[0]), p.scale),
        witness_side="plus" if side[0] > 0 else "minus",
        witness_sign=int(sign[0]),
        method=cfg.tag,
        m=s.m,
        n=s.n,
    )


def hks_exact(s: TwoSamples, k: int, eps: Optional[float] = None) -> TestResult:
    """Exact statistic for ``k <= 5``; eps-approximation for ``k >= 6``."""
    return compute(s, HksConfig(_check_order(k), "exact", eps))


def hks_grid(s: TwoSamples, k: int) -> TestResult:
    """Statistic restricted to knots in ``{0} U Z``."""
    return compute(s, HksConfig(_check_order(k), "grid"))


def hks_wang(s: TwoSamples, k: int) -> TestResult:
    """Plus-side maximum over the pooled sample points only."""
    return compute(s, HksConfig(_check_order(k), "wang"))


def grid_error_bound(s: TwoSamples, k: int) -> float:
    """Upper bound on ``hks_exact - hks_grid`` for ``k >= 2``.

    ``delta / (k-1)! * (mean|x|^(k-1) + mean|y|^(k-1))`` where ``delta`` is
    the largest gap between consecutive points of ``{0} U Z``.
    """
    k = _check_order(k)
    if k < 2:
        raise ValueError("grid error bound needs k >= 2 (the grid statistic is exact for k <= 1)")
    pts = np.unique(np.concatenate([[0.0], s.x, s.y]))
    delta = float(np.max(np.diff(pts))) if pts.size > 1 else 0.0
    lip = (np.mean(np.abs(s.x) ** (k - 1)) + np.mean(np.abs(s.y) ** (k - 1))) / factorial(k - 1)
    return delta * float(lip)


def ks_classic(s: TwoSamples) -> TestResult:
    """Largest absolute gap between the two empirical CDFs."""
    xs, ys = np.sort(s.x), np.sort(s.y)
    z = np.unique(np.concatenate([xs, ys]))
    gap = np.searchsorted(xs, z, side="right") / s.m - np.searchsorted(ys, z, side="right") / s.n
    i = int(np.argmax(np.abs(gap)))
    return TestResult(
        statistic=float(abs(gap[i])),
        order=0,
        witness_knot=float(z[i]),
        witness_side="plus" if z[i] >= 0 else "minus",
        witness_sign=1 if gap[i] >= 0 else -1,
        method="exact",
        m=s.m,
        n=s.n,
    )


def hks_aggregate(s: TwoSamples, k: int, eps: Optional[float] = None) -> float:
    """``sum_i binom(k, i) * T_i**2`` over orders ``i = 0..k``."""
    k = _check_order(k)
    return float(sum(comb(k, i) * hks_exact(s, i, eps).statistic ** 2 for i in range(k + 1)))
