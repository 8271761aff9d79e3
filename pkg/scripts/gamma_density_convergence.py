"""Grid-refinement study for the marching solver on a Gamma target.

With ``xi_t = t`` and ``eta`` compound Poisson at rate ``k`` with Exp(1)
jumps the functional is Gamma(k, 1).  The script prints the sup-norm error
on ``[0.05, t_max]`` for a sequence of halved steps and the observed order.

    python scripts/gamma_density_convergence.py --k 2 --steps 8e-3 4e-3 2e-3 1e-3
"""

import argparse
import time

import numpy as np
from scipy import stats

from expfunc.density import GridConfig, solve_case_i
from expfunc.jumps import Exponential
from expfunc.levy import CharacteristicTriplet, CompoundPoisson, SubordinatorSpec


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--t-max", type=float, default=15.0)
    p.add_argument("--steps", type=float, nargs="+", default=[8e-3, 4e-3, 2e-3, 1e-3])
    args = p.parse_args()
    eta = SubordinatorSpec(0.0, CompoundPoisson(args.k, Exponential(theta=1.0)))
    t = np.linspace(0.05, args.t_max, 4000)
    ref = stats.gamma(args.k).pdf(t)
    prev = None
    print(f"{'h':>10} {'sup error':>12} {'order':>7} {'seconds':>8}")
    for h in args.steps:
        t0 = time.perf_counter()
        dens = solve_case_i(CharacteristicTriplet(1.0), eta, GridConfig(h=h, t_max=args.t_max))
        err = float(np.max(np.abs(dens(t) - ref)))
        dt = time.perf_counter() - t0
        order = "" if prev is None else f"{np.log(prev[1] / err) / np.log(prev[0] / h):7.2f}"
        print(f"{h:10.1e} {err:12.3e} {order:>7} {dt:8.2f}")
        prev = (h, err)


if __name__ == "__main__":
    main()
