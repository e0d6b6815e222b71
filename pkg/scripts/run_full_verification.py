#!/usr/bin/env python3
"""Run the whole property-check battery with the shipped configuration."""

import argparse
import sys
from pathlib import Path

from ergodic_hjb.cli import main as cli_main

REPO = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(REPO / "configs" / "verify_suite.cfg"))
    ap.add_argument("--out", default="out/verify_suite")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    return cli_main(
        ["verify", "--config", args.config, "--out", args.out, "--workers", str(args.workers)]
    )


if __name__ == "__main__":
    sys.exit(main())
