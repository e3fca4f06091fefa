"""Run every experiment with its default configuration into results/<experiment>/."""
import argparse
import sys
from pathlib import Path

from reactive_paths.cli import main
from reactive_paths.experiments import EXPERIMENTS


def cli() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results", type=Path)
    p.add_argument("--seed", default="2024")
    p.add_argument("--workers", default="1")
    args = p.parse_args()
    worst = 0
    for name in EXPERIMENTS:
        print(f"== {name}")
        status = main([name, "--seed", args.seed, "--workers", args.workers,
                       "--out", str(args.out / name), "--check"])
        worst = max(worst, status)
    return worst


if __name__ == "__main__":
    sys.exit(cli())
