#!/usr/bin/env python3
"""Desk calculator: shift rate from corpus totals.

Example: psr_from_totals.py 221400 189500 171500 139000
"""

import argparse
import sys

from accentshift.metrics import psr_from_totals


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("n1", type=int, help="applicable-site total")
    parser.add_argument("n2", type=int, nargs="+", help="surviving-site totals")
    args = parser.parse_args(argv)
    for n2 in args.n2:
        print(f"n2={n2}: psr={psr_from_totals(args.n1, n2):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
