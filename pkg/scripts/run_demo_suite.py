#!/usr/bin/env python3
"""Build the demo corpus, score the full ablation grid, and print the
headline table."""

import argparse
import sys
from pathlib import Path

from accentshift.fixtures import write_demo_suite
from accentshift.harness import run_suite


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="working directory")
    parser.add_argument("--seed", type=int, default=20260818)
    args = parser.parse_args(argv)

    out = Path(args.out)
    config = write_demo_suite(out / "corpus", seed=args.seed)
    reports = run_suite(config, out / "reports")
    print((out / "reports" / "table1.tsv").read_text(encoding="utf-8"), end="")
    print(f"\nreports under {out / 'reports'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
