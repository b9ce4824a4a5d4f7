"""Optimal-cheating bound on S against Alice's efficiency for each preset
number of settings. Writes a CSV with columns eps_a,n,bound."""
import argparse
import csv
import sys

import numpy as np

from steerkit.steering_game import platonic_settings, steering_bound


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--points", type=int, default=200)
    args = p.parse_args(argv)
    fh = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["eps_a", "n", "bound"])
    for n in (2, 3, 4, 6, 10):
        settings = platonic_settings(n)
        for eps in np.linspace(1.0 / args.points, 1.0, args.points):
            w.writerow([f"{eps:.6f}", n, repr(steering_bound(settings, eps))])
    if fh is not sys.stdout:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
