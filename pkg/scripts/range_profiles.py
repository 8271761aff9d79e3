"""Monotone-profile range tests on a few standard pairs.

For each pair of a Lévy process ``xi`` and a target law ``mu`` the script
prints the Laplace-exponent verdict next to the profile verdict and, for a
violation, the point where the profile first decreases.  Use ``--csv`` to
dump the profiles for plotting in long format with
columns ``case``, ``t`` and ``G``.

    python scripts/range_profiles.py --csv profiles.csv
"""

import argparse

import numpy as np

from expfunc.bernstein import StieltjesRepr, bo_to_ggc
from expfunc.families import degenerate_law, gamma_law, pareto_ggc_law
from expfunc.funcmap import range_membership
from expfunc.grids import write_csv
from expfunc.jumps import PointMasses
from expfunc.levy import CharacteristicTriplet, CompoundPoisson
from expfunc.ranges import g1_profile, g2_profile

DOWN1 = CompoundPoisson(1.0, PointMasses((-1.0,), (1.0,)))

CASES = [
    ("gamma(1,1), xi = t - N", "g1", CharacteristicTriplet(1.0, 0.0, DOWN1), gamma_law(1.0, 1.0)),
    ("gamma(2,1.5), xi = 2t", "g1", CharacteristicTriplet(2.0), gamma_law(2.0, 1.5)),
    ("degenerate(1), xi = t - N", "g1", CharacteristicTriplet(1.0, 0.0, DOWN1), degenerate_law(1.0)),
    ("pareto-ggc(0.5), xi = t - N", "g1", CharacteristicTriplet(1.0, 0.0, DOWN1), pareto_ggc_law(0.5)),
    ("ggc(atom 1), xi = t + B", "g2", CharacteristicTriplet(1.0, 1.0), bo_to_ggc(StieltjesRepr(0.0, (1.0,), (1.0,)))),
]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--csv", help="write every profile to this CSV, one column per case")
    args = p.parse_args()
    case, ts, gs = [], [], []
    print(f"{'case':32} {'laplace':>12} {'profile':>15} {'witness':>8}")
    for i, (name, kind, xi, mu) in enumerate(CASES):
        lap = range_membership(xi, mu).outcome
        prof = (g1_profile if kind == "g1" else g2_profile)(xi, mu)
        w = "" if prof.witness is None else f"{prof.witness:8.3f}"
        print(f"{name:32} {lap:>12} {prof.verdict:>15} {w:>8}")
        case.append(np.full(len(prof.grid), float(i)))
        ts.append(np.asarray(prof.grid, float))
        gs.append(np.asarray(prof.values, float))
    if args.csv:
        cols = {"case": np.concatenate(case), "t": np.concatenate(ts), "G": np.concatenate(gs)}
        write_csv(args.csv, cols, {"cases": [c[0] for c in CASES]})


if __name__ == "__main__":
    main()
