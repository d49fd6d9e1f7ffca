"""Null calibration: permutation nulls, the Gaussian-process limit, thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np

from .core import NumericalError, TwoSamples, pool_and_sort, rescale
from .distributions import DistributionSpec
from .statistic import HksConfig, TestResult, compute, statistic_batch
from .streams import blocks, stream

JITTERS = (0.0, 1e-12, 1e-10, 1e-8)
GP_DRAW_BLOCK = 1024


@dataclass(frozen=True)
class NullDistribution:
    samples: np.ndarray
    kind: str
    B: int
    seed: int

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float))
        if s.size < 1 or s.size != self.B:
            raise ValueError("B must equal the number of null draws and be >= 1")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def quantile(self, q):
        return np.quantile(self.samples, q)

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.B

    def p_value(self, observed: float) -> float:
        """``(1 + #{null >= observed}) / (B + 1)``."""
        count = self.B - np.searchsorted(self.samples, observed, side="left")
        return (1.0 + count) / (self.B + 1.0)


# -- permutation null ---------------------------------------------------------


class _Relabeler:
    """Random x/y relabelings of a pooled sample, aggregated onto distinct points."""

    def __init__(self, s: TwoSamples):
        self.m, self.n = s.m, s.n
        values = np.concatenate([s.x, s.y])
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        self.starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
        self.mult = np.diff(np.r_[self.starts, values.size])
        self.order = order

    def weights(self, rng: np.random.Generator, count: int) -> np.ndarray:
        N = self.m + self.n
        keys = rng.random((count, N))
        chosen = np.argpartition(keys, self.m - 1, axis=1)[:, : self.m]
        is_x = np.zeros((count, N), dtype=np.int64)
        np.put_along_axis(is_x, chosen, 1, axis=1)
        nx = np.add.reduceat(is_x[:, self.order], self.starts, axis=1)
        return nx / self.m - (self.mult - nx) / self.n


def permutation_null(
    s: TwoSamples, cfg: HksConfig, B: int, seed: int = 0, observed: float | None = None
) -> tuple[NullDistribution, float]:
    """Permutation null of the configured statistic and the p-value.

    Replicates are drawn in fixed blocks, each from its own stream derived
    from ``seed``, so the result is reproducible and independent of
    evaluation order.
    """
    if int(B) != B or B < 1:
        raise ValueError(f"number of permutations B must be >= 1, got {B}")
    k = cfg.order
    p = rescale(pool_and_sort(s))
    eps = cfg.resolved_eps(s.N)
    if observed is None:
        observed = compute(s, cfg).statistic
    relabel = _Relabeler(s)
    draws = np.empty(B)
    for start, stop, rng in blocks(seed, B, "perm"):
        W = relabel.weights(rng, stop - start)
        v = statistic_batch(p.points, W, k, cfg.method, eps)[0]
        draws[start:stop] = v * p.scale**k
    null = NullDistribution(draws, "permutation", int(B), int(seed))
    return null, null.p_value(observed)


def permutation_test(s: TwoSamples, cfg: HksConfig, B: int = 999, seed: int = 0) -> TestResult:
    res = compute(s, cfg)
    _, pval = permutation_null(s, cfg, B, seed, observed=res.statistic)
    return res.with_p_value(pval)


def statistic_permutation_null(stat_fn, s: TwoSamples, B: int, seed: int = 0):
    """Permutation null for an arbitrary ``stat_fn(TwoSamples) -> float``."""
    if B < 1:
        raise ValueError("B must be >= 1")
    pooled = np.concatenate([s.x, s.y])
    draws = np.empty(B)
    for start, stop, rng in blocks(seed, B, "perm-generic"):
        for i in range(start, stop):
            perm = rng.permutation(pooled)
            draws[i] = stat_fn(TwoSamples(perm[: s.m], perm[s.m :]))
    null = NullDistribution(draws, "permutation", int(B), int(seed))
    return null, null.p_value(stat_fn(s))


# -- Gaussian-process limit ---------------------------------------------------


@dataclass(frozen=True)
class GpGrid:
    """Index set ``(t, side)`` of the discretized process and its covariance."""

    t_grid: np.ndarray
    side: np.ndarray
    cov: np.ndarray
    jitter: float = 0.0


def truncated_powers(X: np.ndarray, k: int, t: np.ndarray, side: np.ndarray) -> np.ndarray:
    """``g^+_t(X)`` for side +1 and ``g^-_t(X)`` for side -1; shape (len(X), len(t))."""
    X = np.asarray(X, dtype=float)[:, None]
    d = np.where(side > 0, X - t, t - X)
    if k == 0:
        return (d > 0).astype(float)
    return np.maximum(d, 0.0) ** k / factorial(k)


def _analytic_k0_cov(F, t, side):
    Ft = F(t)
    Eg = np.where(side > 0, 1.0 - Ft, Ft)
    sa, sb = side[:, None], side[None, :]
    Fa, Fb = Ft[:, None], Ft[None, :]
    pp = 1.0 - np.maximum(Fa, Fb)
    mm = np.minimum(Fa, Fb)
    # P(X > t_a, X < t_b) for a plus index a and minus index b.
    pm = np.maximum(0.0, Fb - Fa)
    mp = np.maximum(0.0, Fa - Fb)
    Egg = np.where(sa > 0, np.where(sb > 0, pp, pm), np.where(sb > 0, mp, mm))
    return Egg - Eg[:, None] * Eg[None, :]


def _mc_cov(ref: DistributionSpec, k, t, side, n_mc, rng, chunk=10_000):
    shift = None
    s1 = np.zeros(t.size)
    s2 = np.zeros((t.size, t.size))
    done = 0
    while done < n_mc:
        b = min(chunk, n_mc - done)
        G = truncated_powers(ref.sample(b, rng), k, t, side)
        if shift is None:
            shift = G.mean(axis=0)
        G -= shift
        s1 += G.sum(axis=0)
        s2 += G.T @ G
        done += b
    mean = s1 / n_mc
    return s2 / n_mc - np.outer(mean, mean)


def covariance_matrix(ref, k: int, t, side, n_mc: int = 100_000, seed: int = 0) -> np.ndarray:
    """``Cov(g_a(X), g_b(X))`` over an index set.

    Empirical references (arrays) use the plug-in covariance; named
    distributions use the closed form for ``k = 0`` and Monte Carlo with
    ``n_mc`` draws otherwise.
    """
    t = np.asarray(t, dtype=float)
    side = np.asarray(side)
    if isinstance(ref, DistributionSpec):
        if k == 0:
            return _analytic_k0_cov(ref.cdf, t, side)
        return _mc_cov(ref, k, t, side, n_mc, stream(seed, "gp-cov"))
    G = truncated_powers(np.asarray(ref, dtype=float), k, t, side)
    G = G - G.mean(axis=0)
    return G.T @ G / G.shape[0]


def gp_covariance(ref, k: int, s: float, t: float, n_mc: int = 100_000, seed: int = 0) -> float:
    """Covariance of the limiting process at knots ``s`` and ``t``.

    Knots ``>= 0`` index ``g^+``; negative knots index ``g^-``.
    """
    tt = np.array([s, t], dtype=float)
    side = np.where(tt >= 0, 1, -1)
    return float(covariance_matrix(ref, k, tt, side, n_mc, seed)[0, 1])


def _quantiles(ref, levels):
    if isinstance(ref, DistributionSpec):
        return np.asarray(ref.ppf(levels), dtype=float)
    return np.quantile(np.asarray(ref, dtype=float), levels)


def gp_grid(ref, k: int, grid_size: int, n_mc: int = 100_000, seed: int = 0) -> GpGrid:
    """Reference-quantile grid plus 0 and the 0.001/0.999 quantiles."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    levels = np.concatenate([np.arange(1, grid_size + 1) / (grid_size + 1), [0.001, 0.999]])
    knots = np.unique(np.concatenate([_quantiles(ref, levels), [0.0]]))
    knots = knots[np.isfinite(knots)]
    # t = 0 indexes both g^+_0 and g^-_0.
    t = np.concatenate([knots[knots < 0], [0.0, 0.0], knots[knots > 0]])
    side = np.concatenate([-np.ones((knots < 0).sum()), [-1, 1], np.ones((knots > 0).sum())]).astype(int)
    cov = covariance_matrix(ref, k, t, side, n_mc, seed)
    cov = 0.5 * (cov + cov.T)
    return GpGrid(t_grid=t, side=side, cov=cov)


def factorize(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factor with the smallest jitter from ``JITTERS`` that works."""
    eye = np.eye(cov.shape[0])
    for j in JITTERS:
        try:
            return np.linalg.cholesky(cov + j * eye), j
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(f"covariance factorization failed even with jitter {JITTERS[-1]}")


def asymptotic_null(ref, k: int, grid_size: int = 512, B: int = 1000, seed: int = 0, n_mc: int = 100_000):
    """Draws of ``sup |G g|`` over the discretized index set.

    These approximate the null limit of ``sqrt(mn/(m+n)) * T``.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if k < 0:
        raise ValueError("order k must be nonnegative")
    grid = gp_grid(ref, k, grid_size, n_mc, seed)
    L, jitter = factorize(grid.cov)
    draws = np.empty(B)
    for start, stop, rng in blocks(seed, B, "gp-draw", size=GP_DRAW_BLOCK):
        Z = rng.standard_normal((L.shape[0], stop - start))
        draws[start:stop] = np.max(np.abs(L @ Z), axis=0)
    return NullDistribution(draws, "asymptotic", int(B), int(seed))


def decision_threshold(alpha: float, m: int, n: int, c0: float, p_moments: float) -> float:
    """Reject when the statistic exceeds ``c0 * alpha**(-1/p) * (1/sqrt(m) + 1/sqrt(n))``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if m < 1 or n < 1:
        raise ValueError("sample sizes must be >= 1")
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    if not p_moments >= 2:
        raise ValueError("p_moments must be >= 2")
    return c0 * alpha ** (-1.0 / p_moments) * (1.0 / sqrt(m) + 1.0 / sqrt(n))
