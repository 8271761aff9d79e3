"""Monte Carlo simulation of exponential functionals and KS distances."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from .errors import PreconditionViolated, TruncationBudgetExceeded, UnsupportedProcess
from .grids import GridCDF
from .levy import (
    CharacteristicTriplet,
    COGARCHSpec,
    Convergence,
    SubordinatorSpec,
    cogarch_to_gou,
    convergence_check,
    gamma0,
)


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    The path stops when ``exp(-xi_t) < delta`` (adaptive rule) or at the
    fixed ``horizon`` when one is given.  ``max_events`` caps the number of
    path segments per sample.
    """

    n_samples: int = 100_000
    seed: int = 0
    h: float = 1e-3
    delta: float = 1e-17
    horizon: float | None = None
    shards: int = 1
    max_events: int = 10**9

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.shards < 1:
            raise ValueError("shards must be at least 1")


@dataclass
class EmpiricalDistribution:
    """Sorted sample with a right-continuous empirical CDF."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=float))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def cdf(self, x):
        return np.searchsorted(self.values, np.asarray(x, float), side="right") / self.n

    def quantile(self, q):
        return np.quantile(self.values, q)

    def summary(self) -> dict:
        qs = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]
        out = {"n": self.n, "mean": float(self.values.mean()), "sd": float(self.values.std(ddof=1)) if self.n > 1 else 0.0}
        for q, v in zip(qs, self.quantile(qs)):
            out[f"q{int(round(q * 100)):02d}"] = float(v)
        for key in ("truncation_bound", "relative_truncation_bound"):
            if key in self.meta:
                out[key] = self.meta[key]
        return out


# ---------------------------------------------------------------------------
# component packing


def _pack(measure, side_filter=None):
    """Flatten a finite measure into the arrays read by the compiled kernel."""
    rates, kinds, pars, signs, phis, offs, lens = [], [], [], [], [], [], []
    xs, cs = [], []
    pos = 0
    try:
        comps = measure.components()
    except PreconditionViolated as exc:
        raise UnsupportedProcess(str(exc)) from exc
    for rate, law, phi in comps:
        if not np.isfinite(rate):
            raise UnsupportedProcess("infinite-activity jump parts cannot be simulated")
        kind, params, a1, a2 = law.sampler()
        sign = float(getattr(law, "sign", 1))
        if kind == K.KIND_TABLE and params:
            sign = float(params[0])
        rates.append(rate)
        kinds.append(kind)
        pars.append(float(params[0]) if params and kind != K.KIND_TABLE else 0.0)
        signs.append(sign)
        phis.append(float(phi) if phi is not None else 0.0)
        offs.append(pos)
        if a1 is not None:
            xs.append(np.asarray(a1, float))
            cs.append(np.asarray(a2, float))
            lens.append(len(a1))
            pos += len(a1)
        else:
            lens.append(0)
    f = lambda v, dt=float: np.asarray(v, dtype=dt)
    return (
        np.cumsum(f(rates)), f(kinds, np.int64), f(pars), f(signs), f(phis), f(offs, np.int64), f(lens, np.int64),
        np.concatenate(xs) if xs else np.zeros(1), np.concatenate(cs) if cs else np.zeros(1),
    )


def _run_sharded(fn: Callable, n: int, shards: int):
    """Split ``range(n)`` into contiguous blocks; results are concatenated in index order."""
    bounds = np.linspace(0, n, shards + 1).astype(int)
    blocks = [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if shards == 1:
        parts = [fn(a, m) for a, m in blocks]
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            parts = list(pool.map(lambda am: fn(*am), blocks))
    return [np.concatenate([p[i] for p in parts]) for i in range(len(parts[0]))]


def _finish(V, tailf, cfg: SimConfig, extra: dict) -> EmpiricalDistribution:
    q999 = float(np.quantile(V, 0.999))
    bound = float(np.max(tailf)) * q999
    scale = float(np.median(np.abs(V))) or 1.0
    meta = {"seed": cfg.seed, "n": int(V.size), "truncation_bound": bound,
            "relative_truncation_bound": bound / scale, "delta": cfg.delta, "horizon": cfg.horizon}
    meta.update(extra)
    return EmpiricalDistribution(V, meta)


def simulate_functional(xi: CharacteristicTriplet, eta: SubordinatorSpec, cfg: SimConfig | None = None) -> EmpiricalDistribution:
    """Sample ``V = int exp(-xi_{s-}) d eta_s``.

    Jumps happen at exact exponential event times; only a Brownian part of
    ``xi`` introduces the step ``h``.  Between events ``xi`` moves linearly
    and the drift integral is exact; across a Brownian step it uses the
    trapezoid rule.  An ``eta`` jump at time ``t`` is weighted with
    ``exp(-xi_{t-})``.
    """
    cfg = cfg or SimConfig()
    if convergence_check(xi, eta) is Convergence.DIVERGES:
        raise PreconditionViolated("the exponential functional diverges")
    if not xi.nu.finite_variation or not np.isfinite(xi.nu.total_mass) or not np.isfinite(eta.nu.total_mass):
        raise UnsupportedProcess("simulation needs compound Poisson jump parts")
    g0 = gamma0(xi)
    xa = _pack(xi.nu)
    ea = _pack(eta.nu)
    horizon = np.inf if cfg.horizon is None else float(cfg.horizon)
    log_delta = math.log(cfg.delta) if cfg.horizon is None else -np.inf

    def block(start, n):
        return K.simulate_block(start, n, cfg.seed, g0, math.sqrt(xi.sigma2), eta.drift, cfg.h, log_delta,
                                horizon, cfg.max_events, *xa, *ea, K.ZW, K.ZK, K.ZF)

    V, tailf, flag = _run_sharded(block, cfg.n_samples, cfg.shards)
    if flag.any():
        raise TruncationBudgetExceeded(
            f"{int(flag.sum())} samples hit the event cap of {cfg.max_events} before truncation"
        )
    return _finish(V, tailf, cfg, {"h": cfg.h})


def simulate_cogarch(spec: COGARCHSpec, cfg: SimConfig | None = None) -> EmpiricalDistribution:
    """Stationary COGARCH volatility sampled through its GOU representation."""
    xi, eta = cogarch_to_gou(spec)
    return simulate_functional(xi, eta, cfg)


def simulate_poisson_poisson(c: float, u: float, v: float, cfg: SimConfig | None = None) -> EmpiricalDistribution:
    """Exact samples of ``sum_j c**(-N(tau_j-))``.

    ``N`` is Poisson with rate ``u`` and ``tau_j`` are the jump times of an
    independent Poisson process with rate ``v``.  Only the order of events
    matters, so each event is an ``N`` jump with probability ``u/(u+v)``.
    """
    cfg = cfg or SimConfig()
    if not (c > 1 and u > 0 and v >= 0):
        raise ValueError("need c > 1, u > 0, v >= 0")
    log_delta = math.log(cfg.delta)

    def block(start, n):
        return K.simulate_poisson_block(start, n, cfg.seed, math.log(c), u / (u + v), v, log_delta)

    V, tailf = _run_sharded(block, cfg.n_samples, cfg.shards)
    return _finish(V, tailf, cfg, {"q": v / (u + v), "mean_exact": v / (u * (1 - 1 / c))})


# ---------------------------------------------------------------------------
# KS distance


def ks_report(e: EmpiricalDistribution, target) -> dict:
    """KS distance plus the target mass clamped outside a grid target's range."""
    x = e.values
    Ft = np.asarray(target(x), float)
    Ft_left = np.asarray(target(np.nextafter(x, -np.inf)), float)
    n = e.n
    hi = np.searchsorted(x, x, side="right") / n
    lo = np.searchsorted(x, x, side="left") / n
    d = float(max(np.max(np.abs(hi - Ft)), np.max(np.abs(Ft_left - lo))))
    clamp = 0.0
    if isinstance(target, GridCDF) and target.evaluator is None:
        g = target.grid
        clamp = float(np.mean((x < g[0]) | (x > g[-1])))
    return {"ks": d, "clamped_fraction": clamp}


def ks_distance(e: EmpiricalDistribution, target) -> float:
    """``sup |F_emp - F_target|`` over sample points.

    Both the values and the left limits are compared, so atoms of either
    distribution are handled correctly.
    """
    return ks_report(e, target)["ks"]
