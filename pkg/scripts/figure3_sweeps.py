"""Steering and nonsteerability panels for the shipped mu and eps_B sweeps.

Writes <out>/<sweep>/figure3_steering.csv and figure3_nonsteer.csv.
"""
import argparse
import sys

from steerkit import cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-o", "--output", default="results/figure3")
    p.add_argument("--samples", type=int, default=200, help="Monte Carlo samples per scenario")
    args = p.parse_args(argv)
    for sweep in ("mu_sweep", "eps_b_sweep"):
        code = cli.main(["figure3", "--scenario-set", sweep, "--samples", str(args.samples),
                         "-o", f"{args.output}/{sweep}"])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
