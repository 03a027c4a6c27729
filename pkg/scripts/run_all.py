"""Run every config in configs/ and print a one-line verdict per experiment.

usage: python scripts/run_all.py [--out out] [--only Pocket,Marginal]
"""
import argparse
import json
import sys
import time
from pathlib import Path

from monostab.pipelines import from_dict, run

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(ROOT / "out"))
    ap.add_argument("--only", default="")
    args = ap.parse_args()
    only = {s for s in args.only.split(",") if s}
    failed = 0
    for path in sorted((ROOT / "configs").glob("*.json")):
        d = json.loads(path.read_text())
        if only and d["experiment"] not in only:
            continue
        t0 = time.perf_counter()
        rep = run(from_dict(d))
        rep.write(Path(args.out) / path.stem)
        failed += not rep.passed
        print(f"{'PASS' if rep.passed else 'FAIL'}  {d['experiment']:<15} {time.perf_counter() - t0:7.1f} s")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
