#!/usr/bin/env python3
"""Run the six figure presets and write their trajectories, plot scripts and reports.

Usage: python3 scripts/reproduce_figures.py [--out DIR] [--no-fock] [--jobs N]

Each preset lands in DIR/<preset>/; run `gnuplot -p plot.gp` inside one to view it.
"""
import argparse
import sys

from cavitycorr import cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="figures")
    p.add_argument("--no-fock", action="store_true", help="skip the Fock-space validator")
    p.add_argument("--jobs", type=int, default=3)
    args = p.parse_args()
    argv = ["--preset", "all", "--out", args.out, "--jobs", str(args.jobs)]
    if args.no_fock:
        argv.append("--no-fock")
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
