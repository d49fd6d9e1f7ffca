"""Comparison two-sample statistics (V-statistic conventions)."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .core import TwoSamples

TESTS = ("energy", "mmd_gaussian", "mmd_polynomial", "anderson_darling")


@dataclass(frozen=True)
class BaselineResult:
    statistic: float
    test: str

    def __post_init__(self):
        if self.test not in TESTS:
            raise ValueError(f"unknown baseline {self.test!r}")
        if not np.isfinite(self.statistic):
            raise ValueError("baseline statistic is not finite")


def _mean_abs_within(a: np.ndarray) -> float:
    # mean over all ordered pairs of |a_i - a_j| from the sorted order.
    a = np.sort(a)
    n = a.size
    coef = 2.0 * np.arange(n) - (n - 1)
    return 2.0 * float(coef @ a) / n**2


def _mean_abs_between(x: np.ndarray, y: np.ndarray) -> float:
    ys = np.sort(y)
    cs = np.concatenate([[0.0], np.cumsum(ys)])
    j = np.searchsorted(ys, x, side="right")
    below = j * x - cs[j]
    above = (cs[-1] - cs[j]) - (ys.size - j) * x
    return float(np.sum(below + above)) / (x.size * y.size)


def energy_distance(s: TwoSamples) -> BaselineResult:
    """``2 E|X-Y| - E|X-X'| - E|Y-Y'|`` in O(N log N)."""
    v = 2 * _mean_abs_between(s.x, s.y) - _mean_abs_within(s.x) - _mean_abs_within(s.y)
    return BaselineResult(max(v, 0.0), "energy")


def median_bandwidth(s: TwoSamples) -> float:
    """Median pairwise distance of the pooled sample (1.0 if it is 0)."""
    z = np.concatenate([s.x, s.y])
    iu = np.triu_indices(z.size, 1)
    d = np.abs(z[:, None] - z[None, :])[iu]
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else 1.0


def mmd_gaussian(s: TwoSamples, bandwidth="auto") -> BaselineResult:
    if bandwidth == "auto" or bandwidth is None:
        bw = median_bandwidth(s)
    else:
        bw = float(bandwidth)
        if not bw > 0:
            raise ValueError("bandwidth must be positive or 'auto'")

    def kmean(a, b):
        # divide before squaring so tiny bandwidths do not underflow
        return float(np.mean(np.exp(-0.5 * ((a[:, None] - b[None, :]) / bw) ** 2)))

    v = kmean(s.x, s.x) + kmean(s.y, s.y) - 2 * kmean(s.x, s.y)
    return BaselineResult(max(v, 0.0), "mmd_gaussian")


def mmd_polynomial(s: TwoSamples, d: int) -> BaselineResult:
    """``sum_i binom(d, i) (mean x^i - mean y^i)^2`` for ``i = 0..d``."""
    if int(d) != d or d < 1:
        raise ValueError("degree d must be an integer >= 1")
    v = sum(comb(d, i) * (np.mean(s.x**i) - np.mean(s.y**i)) ** 2 for i in range(1, d + 1))
    return BaselineResult(float(v), "mmd_polynomial")


def anderson_darling(s: TwoSamples) -> BaselineResult:
    """Two-sample Anderson-Darling rank statistic with midranks.

    This is the unnormalized ``A2akN`` form (Scholz and Stephens) for two
    samples; the standardization used for asymptotic p-values is omitted
    since calibration is by permutation.
    """
    x, y = s.x, s.y
    N = s.N
    z = np.concatenate([x, y])
    zstar = np.unique(z)
    l = np.bincount(np.searchsorted(zstar, z), minlength=zstar.size)
    cum_below = np.cumsum(l) - l  # points strictly below each distinct value
    Bj = cum_below + 0.5 * l
    total = 0.0
    for sample in (x, y):
        ni = sample.size
        fij = np.bincount(np.searchsorted(zstar, sample), minlength=zstar.size)
        Mij = np.cumsum(fij) - 0.5 * fij
        denom = Bj * (N - Bj) - N * l / 4.0
        ok = denom > 0
        inner = l[ok] / N * (N * Mij[ok] - ni * Bj[ok]) ** 2 / denom[ok]
        total += inner.sum() / ni
    return BaselineResult(float(total * (N - 1) / N), "anderson_darling")


def run_baseline(name: str, s: TwoSamples, **params) -> BaselineResult:
    if name == "energy":
        return energy_distance(s)
    if name == "mmd_gaussian":
        return mmd_gaussian(s, params.get("bandwidth", "auto"))
    if name == "mmd_polynomial":
        return mmd_polynomial(s, int(params.get("d", 2)))
    if name == "anderson_darling":
        return anderson_darling(s)
    raise ValueError(f"unknown baseline {name!r}; expected one of {TESTS}")
