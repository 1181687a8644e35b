"""Command line entry point: ``mixmod <suite> [options]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SUITES, ExperimentConfig, load_config
from .suites import SelfCheckError, run_suite

__all__ = ["main", "parser"]


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixmod", description="Numerical checks of two-sided estimates "
                                 "for mixed moduli of smoothness in Lorentz spaces.")
    sub = ap.add_subparsers(dest="suite", required=True)
    for name in SUITES:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config; relative paths in it resolve against its directory")
        p.add_argument("--freeze", action="store_true", help="record ratio bands instead of checking them")
        p.add_argument("--baseline", help="baseline file (overrides the config)")
        p.add_argument("--out", help="CSV report path (overrides the config)")
        p.add_argument("--seed", type=int, help="seed for random families (overrides the config)")
        p.add_argument("--threads", type=int, help="worker threads")
        p.add_argument("--no-selfcheck", action="store_true", help="skip the oracle self-check")
        if name == "inverse":
            p.add_argument("--variant", choices=("natural", "sharp"))
    return ap


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        cfg = load_config(args.config, base=Path(args.config).resolve().parent)
        if cfg.suite != args.suite:
            raise ValueError(f"config is for suite {cfg.suite!r}, not {args.suite!r}")
        cfg = cfg.with_overrides(baseline=args.baseline, out=args.out, seed=args.seed,
                                 threads=args.threads, variant=getattr(args, "variant", None))
        if args.no_selfcheck:
            cfg = cfg.with_overrides(selfcheck=False)
        res = run_suite(cfg, freeze=args.freeze)
    except SelfCheckError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return 3
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out is None:
        sys.stdout.write(res.csv_text())
    s = res.summary
    print(f"{s['suite']} ({s['mode']}): {s['rows']} rows, {s['failed']} failed", file=sys.stderr)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
