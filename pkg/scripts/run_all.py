#!/usr/bin/env python3
"""Run every sample config in configs/ into per-experiment output folders.

Usage: python3 scripts/run_all.py [--out OUT_DIR] [--workers N] [--quiet]
"""

import argparse
import sys
from pathlib import Path

from pfneuron import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="out", help="root output directory")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args()

    configs_dir = Path(__file__).resolve().parent.parent / "configs"
    configs = sorted(configs_dir.glob("*.cfg"))
    if not configs:
        print(f"error: no .cfg files in {configs_dir}", file=sys.stderr)
        return 1

    worst = 0
    for cfg in configs:
        out = Path(args.out) / cfg.stem
        print(f"== {cfg.name} -> {out}")
        code = cli.run(cfg, out, workers=args.workers, quiet=args.quiet)
        if code != 0:
            print(f"== {cfg.name} failed with exit code {code}", file=sys.stderr)
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
