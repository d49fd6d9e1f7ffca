"""Monomial-basis piecewise polynomials and certified interval maximization.

Coefficient arrays are stored in ascending order, ``a[l]`` multiplying
``t**l``.  Most routines accept a leading batch dimension so that many
polynomials (one per interval, per permutation) are handled in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from numpy.polynomial import polynomial as npoly

DEFAULT_EPS = 1e-9
# Derivative degree above which critical points come from Sturm isolation.
CLOSED_FORM_MAX_DEGREE = 4


@dataclass(frozen=True)
class MonomialPoly:
    """Polynomial ``sum(coeffs[l] * t**l)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, t):
        return evaluate(self, t)


@dataclass(frozen=True)
class PiecewisePoly:
    """Pieces ``phi_i`` on ``[knots[i-1], knots[i]]`` with ``knots[0] = 0``.

    ``coeffs[i - 1]`` are the monomial coefficients of ``phi_i``.  Beyond the
    last knot the function is identically zero.
    """

    knots: np.ndarray
    coeffs: np.ndarray
    order: int

    @property
    def n_pieces(self) -> int:
        return self.coeffs.shape[0]

    def piece(self, i: int) -> MonomialPoly:
        return MonomialPoly(self.coeffs[i])

    @property
    def pieces(self) -> list[MonomialPoly]:
        return [self.piece(i) for i in range(self.n_pieces)]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="left") - 1
        idx = np.clip(idx, 0, max(self.n_pieces - 1, 0))
        if self.n_pieces == 0:
            return np.zeros_like(t)
        out = horner(self.coeffs[idx], t)
        return np.where(t > self.knots[-1], 0.0, out)


def horner(coeffs: np.ndarray, t) -> np.ndarray:
    """Evaluate ascending coefficient arrays ``coeffs[..., :]`` at ``t``."""
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.zeros(np.broadcast_shapes(coeffs.shape[:-1], t.shape))
    for j in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * t + coeffs[..., j]
    return out


def evaluate(poly: MonomialPoly, t):
    """Horner evaluation of ``poly`` at ``t`` (scalar or array)."""
    out = horner(poly.coeffs, t)
    return float(out) if out.ndim == 0 else out


def derivative_coeffs(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    d = coeffs.shape[-1]
    if d <= 1:
        return coeffs[..., :0]
    return coeffs[..., 1:] * np.arange(1, d)


def derivative(poly: MonomialPoly) -> MonomialPoly:
    return MonomialPoly(derivative_coeffs(poly.coeffs))


def binomial_terms(z: np.ndarray, k: int) -> np.ndarray:
    """Monomial coefficients of ``(z - t)**k / k!`` for each ``z``; shape (..., k+1)."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape + (k + 1,))
    fk = factorial(k)
    for l in range(k + 1):
        out[..., l] = comb(k, l) * (-1.0) ** l / fk * z ** (k - l)
    return out


def piece_coefficients(z: np.ndarray, C: np.ndarray, k: int) -> np.ndarray:
    """Backward sweep ``phi_i = c_i (z_i - t)^k / k! + phi_{i+1}``.

    ``z`` has shape (K,), ``C`` shape (B, K); returns (B, K, k+1).  The
    reverse cumulative sum is exactly the recurrence run from the last knot
    with ``phi_{K+1} = 0``.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    terms = C[:, :, None] * binomial_terms(z, k)[None, :, :]
    return np.cumsum(terms[:, ::-1, :], axis=1)[:, ::-1, :]


def build_coefficients(z, c, k: int) -> PiecewisePoly:
    """Piecewise polynomial of the order-k criterion over positive knots."""
    if k < 0:
        raise ValueError("order k must be nonnegative")
    z = np.asarray(z, dtype=float)
    c = np.asarray(c, dtype=float)
    if z.shape != c.shape:
        raise ValueError("knots and weights must have the same length")
    if z.size and (z[0] <= 0 or np.any(np.diff(z) <= 0)):
        raise ValueError("knots must be positive and strictly increasing")
    coeffs = piece_coefficients(z, c[None, :], k)[0]
    return PiecewisePoly(knots=np.concatenate([[0.0], z]), coeffs=coeffs, order=k)


# -- root finding -----------------------------------------------------------


def _newton_bisect(p, dp, lo, hi, flo, tol=1e-15, maxiter=100):
    """Root of each monotone ``p`` on ``[lo, hi]`` given a sign change."""
    lo = lo.copy()
    hi = hi.copy()
    up = flo < 0  # p increases through the root
    x = 0.5 * (lo + hi)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(maxiter):
        if not active.any():
            break
        xa = x[active]
        f = horner(p[active], xa)
        df = horner(dp[active], xa)
        below = (f < 0) == up[active]
        la = np.where(below, xa, lo[active])
        ha = np.where(below, hi[active], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - f / df
        bad = ~np.isfinite(xn) | (xn <= la) | (xn >= ha)
        xn = np.where(bad, 0.5 * (la + ha), xn)
        done = (f == 0) | (np.abs(xn - xa) <= tol * (1.0 + np.abs(xa))) | (ha - la <= tol)
        xn = np.where(f == 0, xa, xn)
        lo[active], hi[active], x[active] = la, ha, xn
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return x


def _quadratic_roots(p, lo, hi):
    c0, c1, c2 = p[:, 0], p[:, 1], p[:, 2]
    out = np.full((p.shape[0], 2), np.nan)
    lin = c2 == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out[:, 0] = np.where(lin & (c1 != 0), -c0 / c1, np.nan)
        disc = c1 * c1 - 4 * c2 * c0
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (c1 + np.where(c1 >= 0, 1.0, -1.0) * sq)
        r1 = q / c2
        r2 = c0 / q
        r2 = np.where(q == 0, r1, r2)
        out[:, 0] = np.where(lin, out[:, 0], r1)
        out[:, 1] = np.where(lin, np.nan, r2)
    out[(out < lo[:, None]) | (out > hi[:, None])] = np.nan
    return out


def roots_in_interval(p: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Real roots of batched polynomials inside ``[lo, hi]``.

    Returns an array of shape (M, d) padded with NaN.  Degrees 1 and 2 use
    closed forms (stable quadratic formula).  Higher degrees bracket roots
    between consecutive critical points, found recursively, and refine each
    sign change with safeguarded Newton; only odd-multiplicity roots are
    guaranteed, which are the ones that matter for extrema.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    lo = np.broadcast_to(np.asarray(lo, dtype=float), p.shape[:1]).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), p.shape[:1]).copy()
    d = p.shape[1] - 1
    M = p.shape[0]
    if d <= 0:
        return np.empty((M, 0))
    if d == 1:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = np.where(p[:, 1] != 0, -p[:, 0] / p[:, 1], np.nan)
        r[(r < lo) | (r > hi)] = np.nan
        return r[:, None]
    if d == 2:
        return _quadratic_roots(p, lo, hi)
    dp = derivative_coeffs(p)
    crit = roots_in_interval(dp, lo, hi)
    crit = np.where(np.isnan(crit), hi[:, None], crit)
    brk = np.sort(np.concatenate([lo[:, None], crit, hi[:, None]], axis=1), axis=1)
    vals = horner(p[:, None, :], brk)
    out = np.full((M, d), np.nan)
    for j in range(d):
        a, b = brk[:, j], brk[:, j + 1]
        fa, fb = vals[:, j], vals[:, j + 1]
        at_a = fa == 0
        out[at_a, j] = a[at_a]
        change = (np.sign(fa) * np.sign(fb) < 0) & (b > a)
        if change.any():
            out[change, j] = _newton_bisect(p[change], dp[change], a[change], b[change], fa[change])
    return out


def _trim_rel(p: np.ndarray, rtol: float) -> np.ndarray:
    # Leading terms negligible next to the largest coefficient make division blow up.
    top = np.max(np.abs(p)) if p.size else 0.0
    while p.size > 1 and abs(p[-1]) <= rtol * top:
        p = p[:-1]
    return p


def sturm_sequence(coeffs: np.ndarray, rtol: float = 1e-12) -> list[np.ndarray]:
    """Sturm chain of a single polynomial (ascending coefficients)."""
    p = _trim_rel(npoly.polytrim(np.asarray(coeffs, dtype=float)), rtol)
    seq = [p / np.max(np.abs(p))]
    dp = _trim_rel(npoly.polyder(seq[0]), rtol)
    if dp.size == 0 or not np.any(dp):
        return seq
    seq.append(dp / np.max(np.abs(dp)))
    while seq[-1].size > 1:
        with np.errstate(over="ignore", invalid="ignore"):
            _, r = npoly.polydiv(seq[-2], seq[-1])
        r = np.array(r, dtype=float)
        if not np.all(np.isfinite(r)):
            break
        scale = np.max(np.abs(seq[-2]))
        # Drop leading terms lost to cancellation.
        while r.size and abs(r[-1]) <= rtol * scale:
            r = r[:-1]
        if r.size == 0 or np.max(np.abs(r)) <= rtol * scale:
            break
        seq.append(_trim_rel(-r / np.max(np.abs(r)), rtol))
    return seq


def _sign_variations(seq, x: float) -> int:
    vals = [npoly.polyval(x, s) for s in seq]
    signs = [v > 0 for v in vals if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_roots(coeffs: np.ndarray, a: float, b: float, eps: float) -> list[float]:
    """Real roots of a polynomial in ``[a, b]`` located to width ``eps``.

    Roots are isolated by counting sign variations of the Sturm chain and
    then refined by bisection.  Points whose sign change cannot be
    certified (even multiplicity, roundoff) are still returned as
    candidates; callers only evaluate at them.
    """
    coeffs = npoly.polytrim(np.asarray(coeffs, dtype=float))
    if coeffs.size <= 1 or not np.any(coeffs):
        return []
    seq = sturm_sequence(coeffs)
    out = []
    stack = [(a, b, _sign_variations(seq, a), _sign_variations(seq, b))]
    budget = 10_000
    while stack and budget:
        budget -= 1
        lo, hi, vlo, vhi = stack.pop()
        count = vlo - vhi
        if count <= 0:
            continue
        if count == 1 or hi - lo <= eps:
            out.append(_bisect_root(coeffs, lo, hi, eps))
            continue
        mid = _split_point(coeffs, lo, hi)
        vmid = _sign_variations(seq, mid)
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    if npoly.polyval(a, coeffs) == 0:
        out.append(a)
    return sorted(out)


_SPLITS = (0.5, 0.4615, 0.5385, 0.4231, 0.5769, 0.3846, 0.6154)


def _split_point(coeffs, lo: float, hi: float) -> float:
    # Avoid splitting on a root: its sign there is decided by roundoff.
    absc = np.abs(coeffs)
    for f in _SPLITS:
        x = lo + f * (hi - lo)
        if abs(npoly.polyval(x, coeffs)) > 64 * np.finfo(float).eps * npoly.polyval(abs(x), absc):
            return x
    return 0.5 * (lo + hi)


def _min_abs(coeffs, lo: float, hi: float, eps: float) -> float:
    """Golden-section search for the smallest ``|p|`` (double roots)."""
    g = 0.5 * (np.sqrt(5.0) - 1)
    a, b = lo, hi
    while b - a > eps:
        c, d = b - g * (b - a), a + g * (b - a)
        if abs(npoly.polyval(c, coeffs)) <= abs(npoly.polyval(d, coeffs)):
            b = d
        else:
            a = c
    return 0.5 * (a + b)


def _bisect_root(coeffs, lo: float, hi: float, eps: float) -> float:
    flo = npoly.polyval(lo, coeffs)
    fhi = npoly.polyval(hi, coeffs)
    if fhi == 0:
        return hi
    if flo == 0:
        # Isolation counts roots in (lo, hi]; just right of lo the sign is -sign(fhi).
        flo = -fhi
    if flo * fhi > 0:
        return _min_abs(coeffs, lo, hi, eps)
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        fm = npoly.polyval(mid, coeffs)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_points(coeffs: np.ndarray, a: float, b: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Critical points of one polynomial inside ``[a, b]``."""
    dp = derivative_coeffs(np.asarray(coeffs, dtype=float))
    if dp.size == 0:
        return np.empty(0)
    if dp.size - 1 <= CLOSED_FORM_MAX_DEGREE:
        r = roots_in_interval(dp[None, :], np.array([a]), np.array([b]))[0]
        return r[~np.isnan(r)]
    return np.array(sturm_roots(dp, a, b, eps))


def max_abs_on_interval(poly: MonomialPoly, a: float, b: float, eps: float = DEFAULT_EPS):
    """Maximize ``|poly|`` over ``[a, b]``.

    Returns ``(t_star, value)`` with ``value = |poly(t_star)|``.  Candidates
    are both endpoints and every critical point; ties go to the smallest
    candidate.
    """
    if not a <= b:
        raise ValueError(f"invalid interval [{a}, {b}]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not np.any(poly.coeffs):
        return float(a), 0.0
    cand = np.concatenate([[a], np.clip(critical_points(poly.coeffs, a, b, eps), a, b), [b]])
    vals = np.abs(horner(poly.coeffs, cand))
    i = int(np.argmax(vals))
    return float(cand[i]), float(vals[i])
