"""Run every ROC study in configs/ (or the ones named) and write roc.csv + summary.json."""

import argparse
import sys
from pathlib import Path

from hks.experiments import ExperimentConfig, run_roc, write_roc_outputs

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", help="config stems, e.g. variance mean_shift (default: all but smoke)")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--reps", type=int, help="override replicate count for a quick look")
    args = ap.parse_args(argv)
    paths = [ROOT / "configs" / f"{n}.cfg" for n in args.names] or [
        p for p in sorted((ROOT / "configs").glob("*.cfg")) if p.stem != "smoke"
    ]
    for path in paths:
        cfg = ExperimentConfig.from_file(path)
        if args.reps:
            import dataclasses

            cfg = dataclasses.replace(cfg, reps=args.reps)
        curves = run_roc(cfg, workers=args.workers)
        write_roc_outputs(cfg, curves, cfg.output)
        print(path.stem, " ".join(f"[{k}] {c.auc:.3f}" for k, c in curves.items()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
