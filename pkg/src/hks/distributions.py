"""Reference distributions used by the oracles and the experiment harness.

A spec is written in a small mini-language, ``family:params``::

    normal:MU,SIGMA        (SIGMA is a standard deviation)
    uniform:A,B
    t:DF
    piecewise:B0,B1,...,Bn/H1,...,Hn   (heights are renormalized)
    mixture:W1*SPEC1+W2*SPEC2+...
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import integrate, optimize, stats

FAMILIES = ("normal", "uniform", "student_t", "piecewise", "mixture")


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: tuple = ()
    components: tuple = field(default=(), repr=False)

    def __post_init__(self):
        f, p = self.family, self.params
        if f not in FAMILIES:
            raise ValueError(f"unknown distribution family {f!r}")
        if f == "normal" and not (len(p) == 2 and p[1] > 0):
            raise ValueError("normal needs (mu, sigma) with sigma > 0")
        if f == "uniform" and not (len(p) == 2 and p[1] > p[0]):
            raise ValueError("uniform needs (a, b) with b > a")
        if f == "student_t" and not (len(p) == 1 and p[0] > 0):
            raise ValueError("student_t needs df > 0")
        if f == "piecewise":
            br, h = np.asarray(p[0], float), np.asarray(p[1], float)
            if br.size != h.size + 1 or np.any(np.diff(br) <= 0) or np.any(h < 0):
                raise ValueError("piecewise needs increasing breakpoints and n nonnegative heights")
            mass = float(np.sum(h * np.diff(br)))
            if mass <= 0:
                raise ValueError("piecewise density has zero mass")
            object.__setattr__(self, "params", (tuple(br), tuple(h / mass)))
        if f == "mixture":
            w = np.array([c[0] for c in self.components], float)
            if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
                raise ValueError("mixture weights must be nonnegative and sum to 1")

    # -- constructors -------------------------------------------------------
    @classmethod
    def normal(cls, mu=0.0, sigma=1.0):
        return cls("normal", (float(mu), float(sigma)))

    @classmethod
    def uniform(cls, a=0.0, b=1.0):
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def student_t(cls, df):
        return cls("student_t", (float(df),))

    @classmethod
    def piecewise(cls, breakpoints, heights):
        return cls("piecewise", (tuple(map(float, breakpoints)), tuple(map(float, heights))))

    @classmethod
    def mixture(cls, parts):
        return cls("mixture", (), tuple((float(w), s) for w, s in parts))

    # -- scipy-backed families ----------------------------------------------
    @property
    def _frozen(self):
        f, p = self.family, self.params
        if f == "normal":
            return stats.norm(p[0], p[1])
        if f == "uniform":
            return stats.uniform(p[0], p[1] - p[0])
        if f == "student_t":
            return stats.t(p[0])
        return None

    @property
    def support(self) -> tuple[float, float]:
        f, p = self.family, self.params
        if f == "uniform":
            return p
        if f == "piecewise":
            return p[0][0], p[0][-1]
        if f == "mixture":
            sup = [c.support for _, c in self.components]
            return min(s[0] for s in sup), max(s[1] for s in sup)
        return -np.inf, np.inf

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "piecewise":
            br, h = map(np.asarray, self.params)
            cum = np.concatenate([[0.0], np.cumsum(h * np.diff(br))])
            return np.clip(np.interp(x, br, cum), 0.0, 1.0)
        if self.family == "mixture":
            return sum(w * c.cdf(x) for w, c in self.components)
        return self._frozen.cdf(x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "piecewise":
            br, h = map(np.asarray, self.params)
            i = np.searchsorted(br, x, side="right") - 1
            inside = (x >= br[0]) & (x < br[-1])
            return np.where(inside, h[np.clip(i, 0, h.size - 1)], 0.0)
        if self.family == "mixture":
            return sum(w * c.pdf(x) for w, c in self.components)
        return self._frozen.pdf(x)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if self.family == "piecewise":
            br, h = map(np.asarray, self.params)
            cum = np.concatenate([[0.0], np.cumsum(h * np.diff(br))])
            return np.interp(q, cum, br)
        if self.family == "mixture":
            out = np.empty(q.shape)
            for idx, qi in np.ndenumerate(q):
                lo = min(c.ppf(qi) for _, c in self.components)
                hi = max(c.ppf(qi) for _, c in self.components)
                out[idx] = lo if lo == hi else optimize.brentq(lambda v: self.cdf(v) - qi, lo, hi, xtol=1e-14)
            return out
        return self._frozen.ppf(q)

    def moment(self, j: int) -> float:
        """Raw moment ``E X**j`` (``inf`` when it does not exist)."""
        if j == 0:
            return 1.0
        f, p = self.family, self.params
        if f == "normal":
            mu, sd = p
            # E(mu + sd Z)^j with E Z^(2i) = (2i-1)!!
            tot = 0.0
            for i in range(0, j + 1, 2):
                dfact = float(np.prod(np.arange(i - 1, 0, -2))) if i else 1.0
                tot += comb(j, i) * mu ** (j - i) * sd**i * dfact
            return tot
        if f == "uniform":
            a, b = p
            return (b ** (j + 1) - a ** (j + 1)) / ((j + 1) * (b - a))
        if f == "student_t":
            return float(stats.t(p[0]).moment(j)) if j < p[0] else np.inf
        if f == "piecewise":
            br, h = map(np.asarray, p)
            return float(np.sum(h * (br[1:] ** (j + 1) - br[:-1] ** (j + 1)) / (j + 1)))
        return sum(w * c.moment(j) for w, c in self.components)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        f, p = self.family, self.params
        if f == "normal":
            return rng.normal(p[0], p[1], size=n)
        if f == "uniform":
            return rng.uniform(p[0], p[1], size=n)
        if f == "student_t":
            return rng.standard_t(p[0], size=n)
        if f == "piecewise":
            return self.ppf(rng.random(n))
        w = np.array([c[0] for c in self.components])
        labels = rng.choice(w.size, size=n, p=w)
        out = np.empty(n)
        for i, (_, comp) in enumerate(self.components):
            sel = labels == i
            out[sel] = comp.sample(int(sel.sum()), rng)
        return out

    def total_mass(self) -> float:
        lo, hi = self.support
        if self.family == "piecewise":
            br, h = map(np.asarray, self.params)
            return float(np.sum(h * np.diff(br)))
        if np.isfinite(lo) and np.isfinite(hi):
            pts = None
            if self.family == "mixture":
                pts = sorted({b for _, c in self.components if c.family == "piecewise" for b in c.params[0]})
            return integrate.quad(self.pdf, lo, hi, points=pts, limit=200)[0]
        return float(self.cdf(np.inf) - self.cdf(-np.inf))

    def to_string(self) -> str:
        f, p = self.family, self.params
        if f == "normal":
            return f"normal:{p[0]:g},{p[1]:g}"
        if f == "uniform":
            return f"uniform:{p[0]:.17g},{p[1]:.17g}"
        if f == "student_t":
            return f"t:{p[0]:g}"
        if f == "piecewise":
            return "piecewise:" + ",".join(f"{b:.17g}" for b in p[0]) + "/" + ",".join(f"{v:.17g}" for v in p[1])
        return "mixture:" + "+".join(f"{w:g}*{c.to_string()}" for w, c in self.components)


def _numbers(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.startswith("sqrt"):
            out.append(float(np.sqrt(float(tok[4:].strip("() ")))))
        elif tok.startswith("-sqrt"):
            out.append(-float(np.sqrt(float(tok[5:].strip("() ")))))
        else:
            out.append(float(tok))
    return out


def parse_spec(text: str) -> DistributionSpec:
    """Parse the ``family:params`` mini-language (see module docstring)."""
    if ":" not in text:
        raise ValueError(f"bad distribution spec {text!r}: expected family:params")
    family, _, rest = text.strip().partition(":")
    family = family.strip().lower()
    try:
        if family == "normal":
            return DistributionSpec.normal(*_numbers(rest))
        if family == "uniform":
            return DistributionSpec.uniform(*_numbers(rest))
        if family in ("t", "student_t"):
            (df,) = _numbers(rest)
            return DistributionSpec.student_t(df)
        if family == "piecewise":
            br, _, h = rest.partition("/")
            return DistributionSpec.piecewise(_numbers(br), _numbers(h))
        if family == "mixture":
            parts = []
            for chunk in rest.split("+"):
                w, _, sub = chunk.partition("*")
                parts.append((float(w), parse_spec(sub)))
            return DistributionSpec.mixture(parts)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad distribution spec {text!r}: {exc}") from None
    raise ValueError(f"bad distribution spec {text!r}: unknown family {family!r}")


def cdf(spec: DistributionSpec, x):
    return spec.cdf(x)


def sample(spec: DistributionSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` values; ``seed`` may be an int or a Generator."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return spec.sample(n, rng)
