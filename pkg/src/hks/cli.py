"""Command-line interface: ``hks {test,roc,null-sim,witness,baselines}``.

Exit codes: 0 success, 1 invalid input or config, 2 file I/O, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys


from . import __version__
from .baselines import TESTS as BASELINE_TESTS
from .baselines import median_bandwidth, run_baseline
from .core import NumericalError, TwoSamples, ingest_samples
from .distributions import parse_spec
from .experiments import ExperimentConfig, run_roc, write_roc_outputs
from .nulls import asymptotic_null, permutation_null, statistic_permutation_null
from .oracles import witness_function
from .statistic import METHODS, HksConfig, compute

DIST_HELP = """distribution specs (family:params, comma separated):
  normal:MU,SIGMA          SIGMA is the standard deviation (N(0,1.44) is normal:0,1.2)
  uniform:A,B
  t:DF
  piecewise:B0,..,Bn/H1,..,Hn   piecewise-constant density, heights renormalized
  mixture:W1*SPEC1+W2*SPEC2
numbers may be written sqrt(V) or -sqrt(V)."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _pos_int(text):
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _pos_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _add_samples(p):
    p.add_argument("--x", required=True, metavar="FILE", help="first sample (one value per line)")
    p.add_argument("--y", metavar="FILE", help="second sample; omit with --format csv_labeled")
    p.add_argument("--format", default="csv_one_col", choices=("csv_one_col", "csv_labeled"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hks",
        description="Higher-order Kolmogorov-Smirnov two-sample tests.",
        epilog=DIST_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"hks {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="statistic, witness and permutation p-value")
    _add_samples(p)
    p.add_argument("--k", type=_nonneg_int, required=True, help="order k >= 0")
    p.add_argument("--method", default="exact", choices=METHODS)
    p.add_argument("--eps", type=_pos_float, default=None, help="root tolerance for k >= 6 (default 1/N)")
    p.add_argument("--perms", type=_nonneg_int, default=999, help="permutations (0 skips the p-value)")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--json", metavar="FILE", help="also write the JSON result here")

    p = sub.add_parser("roc", help="ROC/AUC study from a config file")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--out", metavar="DIR", help="output directory (default: config 'output')")
    p.add_argument("--workers", type=_pos_int, default=1)

    p = sub.add_parser(
        "null-sim",
        help="draws of the asymptotic null supremum",
        epilog=DIST_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--dist", required=True, metavar="SPEC")
    p.add_argument("--k", type=_nonneg_int, required=True)
    p.add_argument("--grid", type=_pos_int, default=512)
    p.add_argument("--draws", type=_pos_int, default=1000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", metavar="FILE", help="CSV path (default stdout)")

    p = sub.add_parser("witness", help="normalized witness curve as CSV")
    _add_samples(p)
    p.add_argument("--k", type=_nonneg_int, required=True)
    p.add_argument("--grid", type=_pos_int, default=512)
    p.add_argument("--out", metavar="FILE", help="CSV path (default stdout)")

    p = sub.add_parser("baselines", help="energy, MMD and Anderson-Darling statistics")
    _add_samples(p)
    p.add_argument("--tests", default=",".join(BASELINE_TESTS), help="comma-separated subset")
    p.add_argument("--bandwidth", default="auto", help="Gaussian MMD bandwidth or 'auto'")
    p.add_argument("--d", type=_pos_int, default=2, help="polynomial MMD degree")
    p.add_argument("--perms", type=_nonneg_int, default=0)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--json", metavar="FILE")
    return parser


def _load(args) -> TwoSamples:
    if args.format == "csv_one_col" and not args.y:
        raise UsageError("--y is required unless --format csv_labeled")
    return ingest_samples(args.x, args.y, format=args.format)


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_test(args) -> int:
    s = _load(args)
    cfg = HksConfig(args.k, args.method, args.eps)
    res = compute(s, cfg)
    if args.perms > 0:
        _, p = permutation_null(s, cfg, args.perms, args.seed, observed=res.statistic)
        res = res.with_p_value(p)
    out = res.to_dict()
    out["seed"] = args.seed
    out["config"] = {
        "k": args.k,
        "method": args.method,
        "eps": cfg.resolved_eps(s.N),
        "perms": args.perms,
        "seed": args.seed,
        "format": args.format,
    }
    _emit_json(out, args.json)
    return 0


def cmd_roc(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    out_dir = args.out or cfg.output
    if not out_dir:
        raise UsageError("no output directory: pass --out or set 'output' in the config")
    curves = run_roc(cfg, workers=args.workers)
    summary = write_roc_outputs(cfg, curves, out_dir)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_null_sim(args) -> int:
    spec = parse_spec(args.dist)
    null = asymptotic_null(spec, args.k, args.grid, args.draws, args.seed)
    lines = [f"# dist={spec.to_string()} k={args.k} grid={args.grid} draws={args.draws} seed={args.seed} sorted=true"]
    lines += [repr(float(v)) for v in null.samples]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_witness(args) -> int:
    s = _load(args)
    w = witness_function(s, args.k, grid_points=args.grid)
    if args.out:
        with open(args.out, "w") as fh:
            w.write_csv(fh)
    else:
        w.write_csv(sys.stdout)
    return 0


def cmd_baselines(args) -> int:
    s = _load(args)
    names = [t.strip() for t in args.tests.split(",") if t.strip()]
    bad = [t for t in names if t not in BASELINE_TESTS]
    if bad:
        raise UsageError(f"--tests: unknown baseline(s) {bad}; expected {list(BASELINE_TESTS)}")
    bw = args.bandwidth
    if bw != "auto":
        try:
            bw = float(bw)
        except ValueError:
            raise UsageError(f"--bandwidth: expected a number or 'auto', got {bw!r}") from None
        if not bw > 0:
            raise UsageError("--bandwidth: must be > 0")
    results = {}
    for name in names:
        params = {"bandwidth": bw} if name == "mmd_gaussian" else {"d": args.d} if name == "mmd_polynomial" else {}

        def fn(q, name=name, params=params):
            return run_baseline(name, q, **params).statistic

        entry = {"statistic": fn(s)}
        if args.perms > 0:
            entry["p_value"] = statistic_permutation_null(fn, s, args.perms, args.seed)[1]
        results[name] = entry
    out = {
        "m": s.m,
        "n": s.n,
        "seed": args.seed,
        "results": results,
        "config": {
            "tests": names,
            "bandwidth": median_bandwidth(s) if bw == "auto" else bw,
            "bandwidth_rule": "median" if bw == "auto" else "fixed",
            "d": args.d,
            "perms": args.perms,
            "seed": args.seed,
            "format": args.format,
        },
    }
    _emit_json(out, args.json)
    return 0


COMMANDS = {
    "test": cmd_test,
    "roc": cmd_roc,
    "null-sim": cmd_null_sim,
    "witness": cmd_witness,
    "baselines": cmd_baselines,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, ValueError) else 3


if __name__ == "__main__":
    sys.exit(main())
