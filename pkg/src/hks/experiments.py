"""ROC/AUC studies, null-convergence comparisons and the built-in study distributions.

Configs are INI files with one ``[experiment]`` section::

    [experiment]
    p = normal:0,1
    q = normal:0,1.2
    m = 250
    n = 250
    reps = 500
    seed = 1
    output = results/variance
    tests =
        hks k=0
        hks k=2 method=grid
        energy
        mmd_gaussian bandwidth=auto
        oracle

Every replicate draws from its own RNG stream keyed by (seed, replicate),
so results do not depend on execution order or on ``workers``.
"""

from __future__ import annotations

import configparser
import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import sqrt
from typing import Optional

import numpy as np
from scipy.stats import ks_2samp

from .baselines import TESTS as BASELINE_TESTS
from .baselines import run_baseline
from .core import TwoSamples
from .distributions import DistributionSpec, parse_spec
from .nulls import asymptotic_null
from .statistic import HksConfig, compute, hks_aggregate
from .streams import stream

TEST_NAMES = ("hks", "ks", "hks_aggregate") + BASELINE_TESTS + ("oracle",)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TestSpec:
    """One entry of a config's test list, e.g. ``hks k=2 method=grid``."""

    __test__ = False

    name: str
    params: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "TestSpec":
        parts = text.split()
        if not parts:
            raise ConfigError("empty test entry")
        name, params = parts[0].lower(), []
        if name not in TEST_NAMES:
            raise ConfigError(f"unknown test {name!r}; expected one of {TEST_NAMES}")
        for tok in parts[1:]:
            key, eq, val = tok.partition("=")
            if not eq:
                raise ConfigError(f"bad test parameter {tok!r} (expected key=value)")
            params.append((key, val))
        spec = cls(name, tuple(params))
        spec.statistic_fn()  # validate parameters early
        return spec

    @property
    def label(self) -> str:
        return " ".join([self.name] + [f"{k}={v}" for k, v in self.params])

    def statistic_fn(self):
        p = dict(self.params)
        if self.name in ("hks", "ks"):
            allowed = {"k", "method", "eps"}
            if set(p) - allowed:
                raise ConfigError(f"unknown hks parameters {sorted(set(p) - allowed)}")
            try:
                hcfg = HksConfig(
                    int(p.get("k", 0)) if self.name == "hks" else 0,
                    p.get("method", "exact"),
                    float(p["eps"]) if "eps" in p else None,
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            return lambda s: compute(s, hcfg).statistic
        if self.name == "hks_aggregate":
            if set(p) - {"k"}:
                raise ConfigError(f"unknown hks_aggregate parameters {sorted(set(p) - {'k'})}")
            k = int(p.get("k", 1))
            if k < 0:
                raise ConfigError("k must be >= 0")
            return lambda s: hks_aggregate(s, k)
        if self.name == "oracle":
            return None
        if self.name == "mmd_gaussian":
            bw = p.get("bandwidth", "auto")
            if bw != "auto" and not float(bw) > 0:
                raise ConfigError("bandwidth must be positive or auto")
            bw = bw if bw == "auto" else float(bw)
            return lambda s: run_baseline("mmd_gaussian", s, bandwidth=bw).statistic
        params = {k: v for k, v in p.items()}
        return lambda s: run_baseline(self.name, s, **params).statistic


@dataclass(frozen=True)
class ExperimentConfig:
    p_spec: DistributionSpec
    q_spec: DistributionSpec
    m: int
    n: int
    reps: int
    tests: tuple
    seed: int = 0
    output: Optional[str] = None
    reconstruction: bool = False
    note: str = ""

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.m < 1 or self.n < 1:
            raise ConfigError("m and n must be >= 1")
        tests = tuple(TestSpec.parse(t) if isinstance(t, str) else t for t in self.tests)
        if not tests:
            raise ConfigError("config lists no tests")
        object.__setattr__(self, "tests", tests)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        parser = configparser.ConfigParser()
        with open(path) as fh:  # OSError propagates as an I/O failure
            parser.read_file(fh)
        if "experiment" not in parser:
            raise ConfigError("config needs an [experiment] section")
        sec = parser["experiment"]
        known = {"p", "q", "m", "n", "reps", "seed", "output", "tests", "reconstruction", "note"}
        extra = set(sec) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        try:
            out = sec.get("output")
            if out and not os.path.isabs(out):
                out = os.path.join(os.path.dirname(os.path.abspath(path)), out)
            return cls(
                p_spec=parse_spec(sec["p"]),
                q_spec=parse_spec(sec["q"]),
                m=sec.getint("m"),
                n=sec.getint("n"),
                reps=sec.getint("reps"),
                tests=tuple(line.strip() for line in sec["tests"].splitlines() if line.strip()),
                seed=sec.getint("seed", 0),
                output=out,
                reconstruction=sec.getboolean("reconstruction", False),
                note=sec.get("note", ""),
            )
        except KeyError as exc:
            raise ConfigError(f"config is missing key {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "p": self.p_spec.to_string(),
            "q": self.q_spec.to_string(),
            "m": self.m,
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "tests": [t.label for t in self.tests],
            "reconstruction": self.reconstruction,
            "note": self.note,
        }


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray
    auc: float
    alt: np.ndarray = field(repr=False, default=None)
    null: np.ndarray = field(repr=False, default=None)


def roc_curve(alt, null) -> RocCurve:
    """Reject when statistic >= threshold, sweeping every observed value."""
    alt = np.asarray(alt, dtype=float)
    null = np.asarray(null, dtype=float)
    thr = np.unique(np.concatenate([alt, null]))[::-1]
    sa, sn = np.sort(alt), np.sort(null)
    tpr = (alt.size - np.searchsorted(sa, thr, side="left")) / alt.size
    fpr = (null.size - np.searchsorted(sn, thr, side="left")) / null.size
    tpr = np.concatenate([[0.0], tpr])
    fpr = np.concatenate([[0.0], fpr])
    thr = np.concatenate([[np.inf], thr])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocCurve(thr, tpr, fpr, auc, alt, null)


def sample(spec: DistributionSpec, n: int, seed) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed), "sample")
    return spec.sample(n, rng)


def _loglr(cfg: ExperimentConfig, v):
    with np.errstate(divide="ignore"):
        r = np.log(cfg.p_spec.pdf(v)) - np.log(cfg.q_spec.pdf(v))
    return np.nan_to_num(r, posinf=1e300, neginf=-1e300)


def _oracle_stat(cfg, s: TwoSamples) -> float:
    # log-likelihood ratio of the labeling (x ~ P, y ~ Q) against (x ~ Q, y ~ P), per sample size.
    return float(np.mean(_loglr(cfg, s.x)) - np.mean(_loglr(cfg, s.y)))


def _rep_draws(cfg: ExperimentConfig, r: int):
    rng = stream(cfg.seed, "alt", r)
    x = cfg.p_spec.sample(cfg.m, rng)
    y = cfg.q_spec.sample(cfg.n, rng)
    pooled = stream(cfg.seed, "null", r).permutation(np.concatenate([x, y]))
    return TwoSamples(x, y), TwoSamples(pooled[: cfg.m], pooled[cfg.m :])


def _one_rep(args):
    cfg, r = args
    alt, null = _rep_draws(cfg, r)
    fns = [t.statistic_fn() for t in cfg.tests]
    a = [(_oracle_stat(cfg, alt) if f is None else f(alt)) for f in fns]
    b = [(_oracle_stat(cfg, null) if f is None else f(null)) for f in fns]
    return a, b


def _collect(cfg, workers):
    jobs = [(cfg, r) for r in range(cfg.reps)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_one_rep, jobs, chunksize=8))
    else:
        rows = [_one_rep(j) for j in jobs]
    alt = np.array([r[0] for r in rows])
    null = np.array([r[1] for r in rows])
    return alt, null


def run_roc(cfg: ExperimentConfig, workers: int = 1) -> dict:
    """Alternative draws from (P, Q); null draws by relabeling each alternative pool."""
    alt, null = _collect(cfg, workers)
    return {t.label: roc_curve(alt[:, j], null[:, j]) for j, t in enumerate(cfg.tests)}


def oracle_roc(cfg: ExperimentConfig) -> RocCurve:
    """ROC of the likelihood-ratio statistic that knows P and Q."""
    for spec in (cfg.p_spec, cfg.q_spec):
        if not isinstance(spec, DistributionSpec):
            raise ConfigError("oracle ROC needs densities for both distributions")
    a, b = [], []
    for r in range(cfg.reps):
        alt, null = _rep_draws(cfg, r)
        a.append(_oracle_stat(cfg, alt))
        b.append(_oracle_stat(cfg, null))
    return roc_curve(a, b)


def write_roc_outputs(cfg: ExperimentConfig, curves: dict, out_dir) -> dict:
    """``roc.csv`` (test, threshold, fpr, tpr) and ``summary.json``; returns the summary."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "roc.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["test", "threshold", "fpr", "tpr"])
        for name, c in curves.items():
            for t, f, p in zip(c.thresholds, c.fpr, c.tpr):
                w.writerow([name, repr(float(t)), repr(float(f)), repr(float(p))])
    summary = roc_summary(cfg, curves)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def roc_summary(cfg: ExperimentConfig, curves: dict) -> dict:
    from . import __version__

    return {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "auc": {name: c.auc for name, c in curves.items()},
        "reconstruction_dependent": cfg.reconstruction,
        "versions": _versions(__version__),
    }


def _versions(own):
    import scipy

    return {"hks": own, "numpy": np.__version__, "scipy": scipy.__version__}


def null_convergence(cfg: ExperimentConfig, k: int, grid_size: int = 512, B: int = 1000) -> dict:
    """Scaled finite-sample null draws of ``T`` (both samples from P) vs asymptotic draws."""
    hcfg = HksConfig(k)
    scale = sqrt(cfg.m * cfg.n / (cfg.m + cfg.n))
    finite = np.empty(cfg.reps)
    for r in range(cfg.reps):
        rng = stream(cfg.seed, "finite-null", k, r)
        s = TwoSamples(cfg.p_spec.sample(cfg.m, rng), cfg.p_spec.sample(cfg.n, rng))
        finite[r] = scale * compute(s, hcfg).statistic
    asym = asymptotic_null(cfg.p_spec, k, grid_size, B, seed=cfg.seed).samples
    return {
        "k": k,
        "finite": finite,
        "asymptotic": np.asarray(asym),
        "ks_distance": float(ks_2samp(finite, asym).statistic),
    }


def local_density_specs():
    """Built-in pairs for the local-difference studies.

    Both are reconstructions: ``piecewise`` is Uniform(0,1) against a
    density with three short alternating bumps, ``tail`` is N(0,1) against
    a mixture that moves 3% of the mass into [2.5, 3.5].
    """
    breaks = (0.0, 0.225, 0.275, 0.475, 0.525, 0.725, 0.775, 1.0)
    heights = (1.0, 1.5, 1.0, 0.5, 1.0, 1.5, 1.0)
    piecewise = (DistributionSpec.uniform(0, 1), DistributionSpec.piecewise(breaks, heights))
    tail = (
        DistributionSpec.normal(0, 1),
        DistributionSpec.mixture([(0.97, DistributionSpec.normal(0, 1)), (0.03, DistributionSpec.uniform(2.5, 3.5))]),
    )
    return {"piecewise": piecewise, "tail": tail}
