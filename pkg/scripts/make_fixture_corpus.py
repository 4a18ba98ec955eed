#!/usr/bin/env python3
"""Write the bundled demo corpus (per-condition manifests, embeddings,
references, suite config) to a directory."""

import argparse
import sys

from accentshift.fixtures import write_demo_suite


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=20260818)
    args = parser.parse_args(argv)
    config = write_demo_suite(args.out, seed=args.seed)
    print(f"wrote suite config to {config}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
