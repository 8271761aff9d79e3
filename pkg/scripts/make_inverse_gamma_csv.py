"""Write the inverse-Gamma(1, 1) density with its analytic derivative as a CSV.

The result is the candidate density used by ``expfunc verify`` with
``specs/dufresne.json``.

    python scripts/make_inverse_gamma_csv.py inverse_gamma.csv --t-max 50 --step 1e-3
"""

import argparse

import numpy as np

from expfunc.grids import write_csv


def inverse_gamma_density(t):
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def inverse_gamma_derivative(t):
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    out[pos] = np.exp(-1.0 / tp) * (1.0 - 2.0 * tp) / tp**4
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("output")
    p.add_argument("--t-max", type=float, default=50.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--no-derivative", action="store_true", help="omit the df column")
    args = p.parse_args()
    n = int(round(args.t_max / args.step))
    t = np.linspace(0.0, n * args.step, n + 1)
    cols = {"t": t, "f": inverse_gamma_density(t)}
    if not args.no_derivative:
        cols["df"] = inverse_gamma_derivative(t)
    write_csv(args.output, cols, {"law": "inverse_gamma(1,1)", "step": args.step})


if __name__ == "__main__":
    main()
