"""Command line entry point: ``monostab <experiment> --config cfg.json``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .pipelines import EXPERIMENTS, ConfigError, load, run


def _resolve(name: str) -> str:
    for e in EXPERIMENTS:
        if e.lower() == name.lower():
            return e
    raise ConfigError(f"unknown experiment {name!r}; try --list")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="monostab", description="Run a monostab experiment.")
    ap.add_argument("experiment", nargs="?", help="experiment name (see --list)")
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out", help="output directory (default: config 'output' or out/<experiment>)")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--list", action="store_true", help="list experiments and exit")
    args = ap.parse_args(argv)
    if args.list:
        print("\n".join(EXPERIMENTS))
        return 0
    if not args.experiment or not args.config:
        ap.error("an experiment and --config are required")
    try:
        name = _resolve(args.experiment)
        cfg = load(args.config, seed=args.seed)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.experiment != name:
        print(f"error: config is for {cfg.experiment}, not {name}", file=sys.stderr)
        return 2
    rep = run(cfg)
    out = Path(args.out or cfg.output or Path("out") / name)
    path = rep.write(out)
    print(rep.summary())
    print(f"report: {path}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
