"""Command line front end.

Each subcommand reads a JSON process spec, runs one computation and writes
a CSV or JSON artifact.  Exit codes: 0 on success, 2 when the mathematics
rejects the input (the report then carries a witness), 1 on usage or I/O
errors.  The environment variable ``EXPFUNC_THREADS`` sets the default
number of simulation shards.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .bernstein import (
    DEFAULT_ORDER,
    factors_are_bernstein,
    geometric_grid,
    is_bernstein,
    is_complete_bernstein,
    is_ggc,
    is_selfdecomposable,
)
from .density import (
    GridConfig,
    cogarch_poisson_cdf,
    poisson_selfsim_iterate,
    residual_case_iii,
    solve_case_i,
    solve_case_ii,
    solve_cogarch,
)
from .errors import ExpFuncError, MathematicalRejection, UnsupportedProcess
from .families import law_from_dict
from .funcmap import range_membership
from .grids import GridDensity, write_csv
from .levy import COGARCHSpec, CompoundPoisson, ProcessSpec
from .montecarlo import SimConfig, ks_report, simulate_functional, simulate_poisson_poisson
from .ranges import NON_DECREASING, g1_profile, g2_profile

EXIT_OK, EXIT_USAGE, EXIT_REJECTED = 0, 1, 2

CLASS_TESTS = {
    "bernstein": lambda mu, g, n: is_bernstein(mu, g, n),
    "selfdecomposable": is_selfdecomposable,
    "complete_bernstein": is_complete_bernstein,
    "ggc": is_ggc,
    "c_factors": lambda mu, g, n: factors_are_bernstein(mu, grid=g, max_order=n),
}


class UsageError(Exception):
    """Bad command line or unreadable input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# inputs


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise UsageError(f"{path}: top level must be an object")
    return d


def _spec_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _process(raw: dict) -> ProcessSpec:
    try:
        return ProcessSpec.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid process spec: {exc}") from exc


def _law(raw: dict):
    if "mu" not in raw:
        raise UsageError("spec needs a 'mu' entry with a law family")
    try:
        return law_from_dict(raw["mu"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid law: {exc}") from exc


def _grid_cfg(args, h_default: float, t_max_default: float | None) -> GridConfig:
    return GridConfig(h=args.grid_step or h_default, t_max=args.grid_max if args.grid_max is not None else t_max_default)


def _crop(grid, *cols, lo=None, hi=None):
    keep = np.ones(grid.size, bool)
    if lo is not None:
        keep &= grid >= lo - 1e-12
    if hi is not None:
        keep &= grid <= hi + 1e-12
    return (grid[keep],) + tuple(np.asarray(c)[keep] for c in cols)


# ---------------------------------------------------------------------------
# outputs


class Result:
    """What a command produced: columns for CSV, a report for JSON, and an exit code."""

    def __init__(self, report: dict, columns: dict | None = None, code: int = EXIT_OK):
        self.report = report
        self.columns = columns
        self.code = code


def _emit(result: Result, header: dict, args) -> None:
    fmt = args.format or ("csv" if result.columns is not None else "json")
    if fmt == "csv" and result.columns is None:
        fmt = "json"
    if fmt == "csv":
        h = dict(header)
        h.update({k: v for k, v in result.report.items() if _scalar_or_small(v)})
        first = next(iter(result.columns.values()))
        if first.size > 1:
            h["grid_used"] = {"min": float(first[0]), "max": float(first[-1]), "n": int(first.size)}
        text = write_csv(None, result.columns, h)
    else:
        doc = {"header": header, "report": result.report}
        text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror}") from exc


def _scalar_or_small(v) -> bool:
    try:
        return len(json.dumps(v, default=_json_default)) < 400
    except TypeError:
        return False


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serializable: {type(v).__name__}")


def _finite(x):
    x = float(x)
    return x if np.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))


# ---------------------------------------------------------------------------
# commands


def cmd_solve_density(args, raw) -> Result:
    spec = _process(raw)
    if spec.cogarch is not None:
        cfg = _grid_cfg(args, 1e-2, None)
        if args.grid_max is None:
            cfg = GridConfig(h=cfg.h, t_max=spec.cogarch.beta / spec.cogarch.eta * 200)
        dens = solve_cogarch(spec.cogarch, cfg)
    else:
        xi, eta = spec.pair()
        cfg = _grid_cfg(args, 1e-3, None)
        if xi.sigma2 == 0 and xi.nu.mass_plus == 0:
            dens = solve_case_i(xi, eta, cfg)
        elif xi.sigma2 == 0 and xi.nu.mass_minus == 0 and eta.nu.is_zero:
            dens = solve_case_ii(xi, eta, cfg)
        else:
            raise UnsupportedProcess(
                "no marching solver for this pair: xi needs sigma2 = 0 and one-sided jumps "
                "(negative jumps, or positive jumps with a pure-drift eta)"
            )
    t, f = _crop(dens.grid, dens.values, lo=args.grid_min, hi=args.grid_max)
    report = {"mass": dens.mass(), "tail_mass": dens.tail_mass, "support": [dens.support[0], _finite(dens.support[1])]}
    report.update({k: v for k, v in dens.meta.items()})
    return Result(report, {"t": t, "f": np.where(np.isfinite(f), f, np.nan)})


def _target_cdf(raw_target):
    from scipy import stats

    try:
        dist = getattr(stats, raw_target["scipy"])(*raw_target.get("args", []), **raw_target.get("kwargs", {}))
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid target distribution: {exc}") from exc
    return dist.cdf


def cmd_simulate(args, raw) -> Result:
    spec = _process(raw)
    xi, eta = spec.pair()
    cfg = SimConfig(n_samples=args.samples or 100_000, seed=args.seed, h=args.grid_step or 1e-3,
                    delta=args.delta, shards=args.shards)
    emp = simulate_functional(xi, eta, cfg)
    report = emp.summary()
    report.update({k: v for k, v in emp.meta.items() if k not in report})
    code = EXIT_OK
    target = raw.get("target")
    if args.target is not None:
        try:
            target = json.loads(args.target)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--target is not valid JSON ({exc})") from exc
    if target is not None:
        ks = ks_report(emp, _target_cdf(target))
        report.update(ks)
        if args.tolerance is not None and ks["ks"] > args.tolerance:
            report["witness"] = ks["ks"]
            code = EXIT_REJECTED
    n = emp.n
    return Result(report, {"v": emp.values, "F_emp": np.arange(1, n + 1) / n}, code)


def cmd_check_class(args, raw) -> Result:
    mu = _law(raw)
    tests = list(CLASS_TESTS) if args.test == "all" else [args.test]
    order = args.order if args.order is not None else DEFAULT_ORDER
    grid = geometric_grid()
    results, code = {}, EXIT_OK
    for name in tests:
        try:
            v = CLASS_TESTS[name](mu, grid, order)
            results[name] = v.to_dict()
            if not v.passed:
                code = EXIT_REJECTED
        except MathematicalRejection as exc:
            if len(tests) == 1:
                raise
            results[name] = {"outcome": "rejected", "error": type(exc).__name__, "message": str(exc)}
    report = {"law": mu.name, "order": order, "tests": results}
    if len(tests) == 1:
        report.update(results[tests[0]])
    return Result(report, None, code)


def cmd_check_range(args, raw) -> Result:
    spec = _process({"eta": {"drift": 0.0}, **raw})
    xi, _ = spec.pair()
    mu = _law(raw)
    method = args.method
    if method == "auto":
        method = "laplace"
    if method == "laplace":
        order = args.order if args.order is not None else DEFAULT_ORDER
        v = range_membership(xi, mu, max_order=order)
        report = v.to_dict()
        report["max_rel_error"] = v.max_rel_error
        return Result(report, None, EXIT_REJECTED if v.outcome == "NotInRange" else EXIT_OK)
    tol = args.tolerance if args.tolerance is not None else 1e-8
    if method == "g1":
        prof = g1_profile(xi, mu, _grid_cfg(args, 1e-2, 30.0), tol=tol)
    else:
        prof = g2_profile(xi, mu, _grid_cfg(args, 1e-2, 100.0), tol=tol)
    report = prof.to_dict()
    report["limit"] = _finite(prof.limit) if prof.limit is not None else None
    cols = {"t": prof.grid, "G": prof.values}
    if prof.extracted is not None:
        # the extracted Lévy measure goes into the CSV as its tail, not into the report
        report["eta"] = {"drift": prof.extracted.drift, "nu": "tail column of the CSV output"}
        cols["nu_eta_tail"] = prof.limit - prof.values
    code = EXIT_OK if prof.verdict == NON_DECREASING else EXIT_REJECTED
    return Result(report, cols, code)


def _poisson_atom(spec: COGARCHSpec):
    """``(rate, size)`` when ``nu_S`` is a single point mass, else ``None``."""
    nu = spec.nu_S
    if not isinstance(nu, CompoundPoisson):
        return None
    locs, w = nu.atoms()
    locs, w = np.asarray(locs)[np.asarray(w) > 0], np.asarray(w)[np.asarray(w) > 0]
    if locs.size == 1 and locs[0] > 0 and nu.mass_plus == float(w[0]) and not nu.has_continuous_part:
        return float(w[0]), float(locs[0])
    return None


def cmd_cogarch(args, raw) -> Result:
    spec = _process(raw)
    if spec.cogarch is None:
        raise UsageError("the cogarch command needs a 'cogarch' spec")
    cg = spec.cogarch
    atom = _poisson_atom(cg)
    method = args.method
    if method == "auto":
        method = "delay" if atom is not None else "volterra"
    if method == "delay":
        if atom is None:
            raise UnsupportedProcess("the delay-equation solver needs nu_S to be a single point mass")
        rate, size = atom
        t_max = args.grid_max if args.grid_max is not None else 50 * cg.beta / cg.eta
        F = cogarch_poisson_cdf(cg.beta, cg.eta, rate, GridConfig(h=args.grid_step or 1e-3), phi=cg.phi * size,
                                t_max=t_max)
        t, vals = _crop(F.grid, F.values, lo=args.grid_min, hi=args.grid_max)
        return Result(dict(F.meta), {"t": t, "F": vals})
    cfg = _grid_cfg(args, 1e-2, None)
    if args.grid_max is None:
        cfg = GridConfig(h=cfg.h, t_max=cg.beta / cg.eta * 200)
    dens = solve_cogarch(cg, cfg)
    t, f = _crop(dens.grid, dens.values, lo=args.grid_min, hi=args.grid_max)
    report = {"mass": dens.mass(), "tail_mass": dens.tail_mass}
    report.update(dens.meta)
    return Result(report, {"t": t, "f": np.where(np.isfinite(f), f, np.nan)})


def cmd_poisson_selfsim(args, raw) -> Result:
    p = raw.get("poisson_selfsim")
    if not isinstance(p, dict) or "c" not in p or "q" not in p:
        raise UsageError("spec needs 'poisson_selfsim': {'c': ..., 'q': ...}")
    c, q = float(p["c"]), float(p["q"])
    T = args.grid_max if args.grid_max is not None else float(p.get("T", 20.0))
    tol = args.tolerance if args.tolerance is not None else 1e-6
    F = poisson_selfsim_iterate(c, q, T, GridConfig(h=args.grid_step or 1e-3), tol=tol)
    report = dict(F.meta)
    code = EXIT_OK if F.meta["converged"] else EXIT_REJECTED
    if not F.meta["converged"]:
        report["witness"] = F.meta["sup_change"]
    if args.samples:
        # rates with v / (u + v) = q; only the ratio matters for the law
        cfg = SimConfig(n_samples=args.samples, seed=args.seed, delta=args.delta, shards=args.shards)
        emp = simulate_poisson_poisson(c, 1.0 - q, q, cfg)
        report["ks_vs_simulation"] = ks_report(emp, F)["ks"]
        report["simulated_mean"] = float(emp.values.mean())
    t, vals = _crop(F.grid, F.values, lo=args.grid_min)
    return Result(report, {"t": t, "F": vals}, code)


def cmd_verify(args, raw) -> Result:
    spec = _process(raw)
    xi, eta = spec.pair()
    try:
        dens, df = GridDensity.from_csv(args.density)
    except OSError as exc:
        raise UsageError(f"cannot read {args.density}: {exc.strerror}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = residual_case_iii(xi, eta, dens, derivative=df)
    tol = args.tolerance if args.tolerance is not None else 1e-4
    report = rep.to_dict()
    report.update({"tolerance": tol, "derivative": "analytic" if df is not None else "numeric"})
    code = EXIT_OK
    if rep.max_abs > tol:
        report["witness"] = rep.argmax
        code = EXIT_REJECTED
    return Result(report, {"t": rep.grid, "residual": rep.residual}, code)


COMMANDS = {
    "solve-density": cmd_solve_density,
    "simulate": cmd_simulate,
    "check-class": cmd_check_class,
    "check-range": cmd_check_range,
    "cogarch": cmd_cogarch,
    "poisson-selfsim": cmd_poisson_selfsim,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# parser


def _positive(kind):
    def parse(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {s!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {s!r}")
        return v

    return parse


def _non_negative_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {s!r}")
    return v


def _default_shards() -> int:
    env = os.environ.get("EXPFUNC_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--spec", required=True, help="JSON process spec")
    shared.add_argument("--output", "-o", help="output file (default: stdout)")
    shared.add_argument("--format", choices=["csv", "json"], help="artifact format")
    shared.add_argument("--grid-min", type=float, help="left end of the reported grid")
    shared.add_argument("--grid-max", type=_positive(float), help="right end of the grid")
    shared.add_argument("--grid-step", type=_positive(float), help="grid step (or Brownian step when simulating)")
    shared.add_argument("--samples", type=_non_negative_int, help="Monte Carlo sample count")
    shared.add_argument("--seed", type=_non_negative_int, default=0)
    shared.add_argument("--tolerance", type=_positive(float), help="acceptance tolerance")
    shared.add_argument("--order", type=_non_negative_int, help="highest derivative order tested")
    shared.add_argument("--shards", type=_positive(int), default=_default_shards(), help="simulation worker threads")
    shared.add_argument("--delta", type=_positive(float), default=1e-12,
                        help="simulation stops once exp(-xi) falls below this")

    p = _Parser(prog="expfunc", description="Exponential functionals of Lévy processes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve-density", parents=[shared], help="density by the marching solver")
    s = sub.add_parser("simulate", parents=[shared], help="Monte Carlo samples, optional KS check")
    s.add_argument("--target", help='scipy target as JSON, e.g. {"scipy": "invgamma", "args": [1]}')
    c = sub.add_parser("check-class", parents=[shared], help="class membership of the law 'mu'")
    c.add_argument("--test", choices=sorted(CLASS_TESTS) + ["all"], default="all")
    r = sub.add_parser("check-range", parents=[shared], help="is 'mu' the law of a functional of xi")
    r.add_argument("--method", choices=["auto", "laplace", "g1", "g2"], default="auto")
    g = sub.add_parser("cogarch", parents=[shared], help="stationary COGARCH volatility")
    g.add_argument("--method", choices=["auto", "delay", "volterra"], default="auto")
    sub.add_parser("poisson-selfsim", parents=[shared], help="Poisson-Poisson fixed-point CDF")
    v = sub.add_parser("verify", parents=[shared], help="residual of a candidate density")
    v.add_argument("--density", required=True, help="CSV with columns t,f and optional df")
    return p


def _header(args, raw) -> dict:
    grid = {k: getattr(args, k) for k in ("grid_min", "grid_max", "grid_step") if getattr(args, k) is not None}
    return {"command": args.command, "spec_hash": _spec_hash(raw), "seed": args.seed, "grid": grid,
            "tolerance": args.tolerance, "version": __version__}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.grid_min is not None and args.grid_max is not None and args.grid_min >= args.grid_max:
        parser.error("--grid-min must be below --grid-max")
    try:
        raw = _load_json(args.spec)
        header = _header(args, raw)
        result = COMMANDS[args.command](args, raw)
        _emit(result, header, args)
        return result.code
    except UsageError as exc:
        print(f"expfunc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MathematicalRejection as exc:
        report = {"outcome": "rejected", "error": type(exc).__name__, "message": str(exc)}
        if exc.witness is not None:
            report["witness"] = exc.witness
        _emit(Result(report), header, argparse.Namespace(**{**vars(args), "format": "json"}))
        return EXIT_REJECTED
    except (ExpFuncError, ValueError) as exc:
        print(f"expfunc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
