"""(b.x, ||Tx||) ensembles for a Werner state and for mu = 0.8 with b = 0.05 z.

Writes CSV + SVG pairs under the output directory.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from steerkit import cli
from steerkit.io import write_state
from steerkit.qstate import bloch_assemble, werner_state


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-o", "--output", default="results/figure_s2")
    p.add_argument("--mu", type=float, default=0.951)
    p.add_argument("--eps", type=float, default=2.52e-3)
    p.add_argument("--dirs", type=int, default=625)
    args = p.parse_args(argv)
    out = Path(args.output)
    states = {
        "werner": werner_state(args.mu),
        "werner080_b005": bloch_assemble(np.zeros(3), [0, 0, 0.05], -0.8 * np.eye(3)),
    }
    for name, rho in states.items():
        path = out / f"{name}_state.json"
        write_state(path, rho)
        code = cli.main(["figure-s2", str(path), "--eps", str(args.eps), "--dirs", str(args.dirs),
                         "-o", str(out / name)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
