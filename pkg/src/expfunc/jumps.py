"""Probability laws for the jump sizes of compound Poisson measures.

Two flavours exist.  :class:`PointMasses` is a finite signed atomic law.
The continuous laws describe a magnitude on ``(0, inf)`` and carry a
``sign`` so the same object serves positive and negative jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

# Codes understood by the compiled samplers in ``_kernels``.
KIND_ATOMS = 0
KIND_EXPONENTIAL = 1
KIND_NORMAL_SQUARED = 2
KIND_LOG_PARETO = 3
KIND_TABLE = 4


def _quad(g: Callable[[float], float], lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    val, _ = integrate.quad(g, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)
    return float(val)


@dataclass(frozen=True)
class PointMasses:
    """Finite atomic law with arbitrary real support points."""

    values: tuple
    weights: tuple

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if v.shape != w.shape or v.size == 0:
            raise ValueError("values and weights must be non-empty and aligned")
        if np.any(w < 0) or not np.all(np.isfinite(v)):
            raise ValueError("weights must be non-negative and values finite")
        if np.any(v == 0.0):
            raise ValueError("a jump of size zero is not a jump")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must have positive total")
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "weights", tuple((w / total).tolist()))

    is_atomic = True

    def atoms(self):
        return np.array(self.values), np.array(self.weights)

    def tail_plus(self, x):
        v, w = self.atoms()
        x = np.asarray(x, dtype=float)
        return np.sum(w * (v > x[..., None]), axis=-1)

    def tail_minus(self, x):
        v, w = self.atoms()
        x = np.asarray(x, dtype=float)
        return np.sum(w * (v < -x[..., None]), axis=-1)

    def density(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    @property
    def prob_plus(self) -> float:
        v, w = self.atoms()
        return float(w[v > 0].sum())

    @property
    def prob_minus(self) -> float:
        v, w = self.atoms()
        return float(w[v < 0].sum())

    def expect(self, g, lo: float, hi: float, closed_lo=False, closed_hi=True) -> float:
        v, w = self.atoms()
        keep = ((v > lo) | (closed_lo & (v == lo))) & ((v < hi) | (closed_hi & (v == hi)))
        if not keep.any():
            return 0.0
        return float(np.sum(w[keep] * np.asarray(g(v[keep]), dtype=float)))

    def abs_moment_beyond(self, side: int, lo: float = 1.0) -> float:
        v, w = self.atoms()
        keep = (np.sign(v) == side) & (np.abs(v) > lo)
        return float(np.sum(w[keep] * np.abs(v[keep])))

    def log_moment(self) -> float:
        v, w = self.atoms()
        keep = v > 1
        return float(np.sum(w[keep] * np.log(v[keep])))

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        v, w = self.atoms()
        return rng.choice(v, size=size, p=w)

    def sampler(self):
        v, w = self.atoms()
        return KIND_ATOMS, (), v, np.cumsum(w)

    def to_dict(self) -> dict:
        return {"type": "point", "values": list(self.values), "weights": list(self.weights)}


@dataclass(frozen=True)
class _Magnitude:
    """Shared machinery for continuous laws of ``sign * M`` with ``M > 0``."""

    is_atomic = False

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    # Subclasses provide sf, pdf, ppf, mean, and optionally log_moment_mag.

    def atoms(self):
        return np.empty(0), np.empty(0)

    @property
    def prob_plus(self) -> float:
        return 1.0 if self.sign > 0 else 0.0

    @property
    def prob_minus(self) -> float:
        return 1.0 if self.sign < 0 else 0.0

    def tail_plus(self, x):
        x = np.asarray(x, dtype=float)
        return self.sf(x) if self.sign > 0 else np.zeros_like(x)

    def tail_minus(self, x):
        x = np.asarray(x, dtype=float)
        return self.sf(x) if self.sign < 0 else np.zeros_like(x)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        m = self.sign * y
        out = np.zeros_like(y)
        pos = m > 0
        if np.any(pos):
            out[pos] = self.pdf(m[pos])
        return out

    def expect(self, g, lo: float, hi: float, closed_lo=False, closed_hi=True) -> float:
        if self.sign > 0:
            a, b = max(lo, 0.0), hi
            return _quad(lambda m: g(m) * self.pdf(m), a, b) if b > a else 0.0
        a, b = max(-hi, 0.0), -lo
        return _quad(lambda m: g(-m) * self.pdf(m), a, b) if b > a else 0.0

    def abs_moment_beyond(self, side: int, lo: float = 1.0) -> float:
        if side != self.sign:
            return 0.0
        if not np.isfinite(self.mean):
            return float("inf")
        return _quad(lambda m: m * self.pdf(m), lo, np.inf)

    def log_moment(self) -> float:
        if self.sign < 0:
            return 0.0
        return self.log_moment_mag()

    def log_moment_mag(self) -> float:
        return _quad(lambda m: np.log(m) * self.pdf(m), 1.0, np.inf)

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.sign * self.ppf(rng.random(size))


@dataclass(frozen=True)
class Exponential(_Magnitude):
    """Exponential magnitude with rate ``theta``."""

    theta: float = 1.0
    sign: int = 1

    def __post_init__(self):
        super().__post_init__()
        if not self.theta > 0:
            raise ValueError("theta must be positive")

    def sf(self, x):
        return np.exp(-self.theta * np.maximum(x, 0.0))

    def pdf(self, x):
        return self.theta * np.exp(-self.theta * x)

    def ppf(self, p):
        return -np.log1p(-p) / self.theta

    @property
    def mean(self) -> float:
        return 1.0 / self.theta

    def abs_moment_beyond(self, side: int, lo: float = 1.0) -> float:
        if side != self.sign:
            return 0.0
        return float((lo + 1.0 / self.theta) * np.exp(-self.theta * lo))

    def log_moment_mag(self) -> float:
        return float(special.exp1(self.theta))

    def sampler(self):
        return KIND_EXPONENTIAL, (self.theta,), None, None

    def to_dict(self) -> dict:
        return {"type": "exponential", "theta": self.theta, "sign": self.sign}


@dataclass(frozen=True)
class NormalSquared(_Magnitude):
    """Square of a standard normal variable, scaled by ``scale``."""

    scale: float = 1.0
    sign: int = 1

    def sf(self, x):
        return special.erfc(np.sqrt(np.maximum(x, 0.0) / (2.0 * self.scale)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float) / self.scale
        return np.exp(-0.5 * x) / np.sqrt(2.0 * np.pi * x) / self.scale

    def ppf(self, p):
        return self.scale * stats.chi2.ppf(p, 1)

    @property
    def mean(self) -> float:
        return self.scale

    def sampler(self):
        return KIND_NORMAL_SQUARED, (self.scale,), None, None

    def to_dict(self) -> dict:
        return {"type": "normal_squared", "scale": self.scale, "sign": self.sign}


@dataclass(frozen=True)
class LogPareto(_Magnitude):
    """Magnitude with survival function ``(1 + log(1 + x)) ** -alpha``.

    Every power moment is infinite; the logarithmic moment is finite
    exactly when ``alpha > 1``.
    """

    alpha: float = 2.0
    sign: int = 1

    def __post_init__(self):
        super().__post_init__()
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def sf(self, x):
        return (1.0 + np.log1p(np.maximum(x, 0.0))) ** (-self.alpha)

    def pdf(self, x):
        return self.alpha * (1.0 + np.log1p(x)) ** (-self.alpha - 1.0) / (1.0 + x)

    def ppf(self, p):
        return np.expm1((1.0 - p) ** (-1.0 / self.alpha) - 1.0)

    @property
    def mean(self) -> float:
        return float("inf")

    def log_moment_mag(self) -> float:
        if self.alpha <= 1.0:
            return float("inf")
        a = self.alpha
        return _quad(lambda w: np.log(np.expm1(w)) * a * (1.0 + w) ** (-a - 1.0), np.log(2.0), np.inf)

    def sampler(self):
        return KIND_LOG_PARETO, (self.alpha,), None, None

    def to_dict(self) -> dict:
        return {"type": "log_pareto", "alpha": self.alpha, "sign": self.sign}


@dataclass(frozen=True)
class ScipyLaw(_Magnitude):
    """Any continuous ``scipy.stats`` law supported on ``[0, inf)``.

    Compiled simulation goes through a tabulated quantile function, so
    samples are exact only up to linear interpolation between 2**14 levels.
    """

    name: str = "expon"
    params: dict = field(default_factory=dict)
    sign: int = 1

    def __post_init__(self):
        super().__post_init__()
        dist = self.frozen
        if dist.support()[0] < 0:
            raise ValueError("magnitude law must live on [0, inf)")

    @property
    def frozen(self):
        return getattr(stats, self.name)(**self.params)

    def sf(self, x):
        return self.frozen.sf(x)

    def pdf(self, x):
        return self.frozen.pdf(x)

    def ppf(self, p):
        return self.frozen.ppf(p)

    @property
    def mean(self) -> float:
        return float(self.frozen.mean())

    def sampler(self):
        levels = np.concatenate([np.linspace(0.0, 0.999, 2**14), 1.0 - np.logspace(-3, -12, 200)])
        xs = self.frozen.ppf(levels)
        xs[0] = max(xs[0], 0.0)
        return KIND_TABLE, (), xs, levels

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items())), self.sign))

    def to_dict(self) -> dict:
        return {"type": "scipy", "name": self.name, "params": dict(self.params), "sign": self.sign}


def law_from_dict(d: dict):
    """Inverse of ``to_dict`` for every law in this module."""
    kind = d.get("type")
    if kind == "point":
        return PointMasses(tuple(d["values"]), tuple(d["weights"]))
    sign = int(d.get("sign", 1))
    if kind == "exponential":
        return Exponential(theta=float(d["theta"]), sign=sign)
    if kind == "normal_squared":
        return NormalSquared(scale=float(d.get("scale", 1.0)), sign=sign)
    if kind == "log_pareto":
        return LogPareto(alpha=float(d["alpha"]), sign=sign)
    if kind == "scipy":
        return ScipyLaw(name=d["name"], params=dict(d.get("params", {})), sign=sign)
    raise ValueError(f"unknown jump law type {kind!r}")
