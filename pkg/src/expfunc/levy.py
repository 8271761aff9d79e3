"""Lévy measures, characteristic triplets and the pair ``(xi, eta)``.

A measure exposes its two one-sided tails, its atomic part and the
density of its continuous part.  Everything downstream (jump integrals,
Volterra kernels, samplers) is written against that small interface.

Conventions: the truncation function is ``1{|x| <= 1}``, so a triplet
``(gamma, sigma2, nu)`` has Laplace exponent
``-log E exp(-u xi_1)`` built from ``gamma`` and the compensated jumps.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    MeanUndefined,
    NotStationary,
    PreconditionViolated,
    SmallJumpsNotIntegrable,
)
from .jumps import Exponential, PointMasses, law_from_dict


class LevyMeasure:
    """Common interface; concrete measures override what they can do exactly."""

    finite_variation = True

    # Tails -----------------------------------------------------------
    def tail_plus(self, x):
        raise NotImplementedError

    def tail_minus(self, x):
        raise NotImplementedError

    def cont_tail_plus(self, x):
        raise NotImplementedError

    def cont_tail_minus(self, x):
        raise NotImplementedError

    @property
    def mass_plus(self) -> float:
        raise NotImplementedError

    @property
    def mass_minus(self) -> float:
        raise NotImplementedError

    @property
    def total_mass(self) -> float:
        return self.mass_plus + self.mass_minus

    @property
    def is_zero(self) -> bool:
        return self.total_mass == 0.0

    # Structure -------------------------------------------------------
    def atoms(self):
        """Atomic part as ``(locations, weights)``."""
        raise NotImplementedError

    def density(self, y):
        """Density of the continuous part at signed points ``y``."""
        raise NotImplementedError

    @property
    def has_continuous_part(self) -> bool:
        raise NotImplementedError

    # Integrals -------------------------------------------------------
    def expect(self, g: Callable, lo: float, hi: float, closed_lo=False, closed_hi=True) -> float:
        """Integral of ``g`` against the measure over ``(lo, hi]`` (flags adjust ends)."""
        raise NotImplementedError

    def abs_moment_beyond(self, side: int, lo: float = 1.0) -> float:
        """Integral of ``|x|`` over jumps of sign ``side`` with ``|x| > lo``."""
        raise NotImplementedError

    def log_moment(self) -> float:
        """Integral of ``log x`` over ``(1, inf)``."""
        raise NotImplementedError

    def laplace_part(self, u):
        """``int_(0,inf) (1 - exp(-u t)) nu(dt)`` for each ``u``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([self.expect(lambda t, s=s: -np.expm1(-s * t), 0.0, np.inf) for s in u])
        return out

    # Transformations -------------------------------------------------
    def scaled(self, c: float) -> "LevyMeasure":
        raise NotImplementedError

    def components(self) -> list:
        """Finite pieces as ``(rate, law, phi)`` for simulation; ``phi`` marks an image map."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __add__(self, other: "LevyMeasure") -> "LevyMeasure":
        return SumMeasure((self, other))


def _as_array(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Zero(LevyMeasure):
    """The null measure."""

    def tail_plus(self, x):
        return np.zeros_like(_as_array(x))

    tail_minus = cont_tail_plus = cont_tail_minus = density = tail_plus
    mass_plus = property(lambda self: 0.0)
    mass_minus = property(lambda self: 0.0)
    has_continuous_part = False

    def atoms(self):
        return np.empty(0), np.empty(0)

    def expect(self, g, lo, hi, closed_lo=False, closed_hi=True):
        return 0.0

    def abs_moment_beyond(self, side, lo=1.0):
        return 0.0

    def log_moment(self):
        return 0.0

    def laplace_part(self, u):
        return np.zeros_like(np.atleast_1d(_as_array(u)))

    def scaled(self, c):
        return self

    def components(self):
        return []

    def to_dict(self):
        return {"type": "Zero"}


@dataclass(frozen=True)
class CompoundPoisson(LevyMeasure):
    """``rate`` times a jump law."""

    rate: float
    law: object

    def __post_init__(self):
        if not (self.rate >= 0 and np.isfinite(self.rate)):
            raise ValueError("rate must be finite and non-negative")

    def tail_plus(self, x):
        return self.rate * self.law.tail_plus(_as_array(x))

    def tail_minus(self, x):
        return self.rate * self.law.tail_minus(_as_array(x))

    def cont_tail_plus(self, x):
        return np.zeros_like(_as_array(x)) if self.law.is_atomic else self.tail_plus(x)

    def cont_tail_minus(self, x):
        return np.zeros_like(_as_array(x)) if self.law.is_atomic else self.tail_minus(x)

    @property
    def mass_plus(self):
        return self.rate * self.law.prob_plus

    @property
    def mass_minus(self):
        return self.rate * self.law.prob_minus

    @property
    def has_continuous_part(self):
        return not self.law.is_atomic and self.rate > 0

    def atoms(self):
        v, w = self.law.atoms()
        return v, self.rate * w

    def density(self, y):
        return self.rate * self.law.density(_as_array(y))

    def expect(self, g, lo, hi, closed_lo=False, closed_hi=True):
        if self.rate == 0:
            return 0.0
        return self.rate * self.law.expect(g, lo, hi, closed_lo, closed_hi)

    def abs_moment_beyond(self, side, lo=1.0):
        return self.rate * self.law.abs_moment_beyond(side, lo) if self.rate else 0.0

    def log_moment(self):
        return self.rate * self.law.log_moment() if self.rate else 0.0

    def laplace_part(self, u):
        u = np.atleast_1d(_as_array(u))
        if isinstance(self.law, Exponential) and self.law.sign > 0:
            return self.rate * u / (self.law.theta + u)
        if self.law.is_atomic:
            v, w = self.law.atoms()
            pos = v > 0
            return self.rate * np.sum(w[pos] * -np.expm1(-np.outer(u, v[pos])), axis=1)
        return super().laplace_part(u)

    def scaled(self, c):
        return CompoundPoisson(self.rate * c, self.law)

    def components(self):
        return [(self.rate, self.law, None)] if self.rate > 0 else []

    def to_dict(self):
        return {"type": "CompoundPoisson", "rate": self.rate, "jumps": self.law.to_dict()}


@dataclass(frozen=True)
class ExponentialTail(CompoundPoisson):
    """Measure with tail ``k exp(-theta x)`` on one side of the origin."""

    rate: float = 0.0
    law: object = None
    k: float = 1.0
    theta: float = 1.0
    side: int = 1

    def __init__(self, k: float, theta: float, side: int = 1):
        object.__setattr__(self, "k", float(k))
        object.__setattr__(self, "theta", float(theta))
        object.__setattr__(self, "side", int(side))
        object.__setattr__(self, "rate", float(k))
        object.__setattr__(self, "law", Exponential(theta=float(theta), sign=int(side)))
        self.__post_init__()

    def scaled(self, c):
        return ExponentialTail(self.k * c, self.theta, self.side)

    def to_dict(self):
        return {"type": "ExponentialTail", "k": self.k, "theta": self.theta, "side": self.side}


@dataclass(frozen=True)
class Tabulated(LevyMeasure):
    """One-sided measure given by its tail on an increasing grid of magnitudes.

    The tail is linear between nodes.  Below the first node it follows the
    power law fitted to the first two nodes, and beyond the last node the
    exponential law fitted to the last two.
    """

    x: tuple
    tail: tuple
    side: int = 1

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.tail, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.shape != t.shape:
            raise ValueError("need at least two aligned nodes")
        if np.any(np.diff(x) <= 0) or x[0] <= 0:
            raise ValueError("nodes must be positive and increasing")
        if np.any(np.diff(t) > 1e-14 * max(1.0, t[0])) or np.any(t < 0):
            raise ValueError("tail must be non-negative and non-increasing")
        object.__setattr__(self, "x", tuple(x.tolist()))
        object.__setattr__(self, "tail", tuple(np.maximum.accumulate(t[::-1])[::-1].tolist()))
        if self.left_index >= 2:
            raise SmallJumpsNotIntegrable("tail grows like x**-a with a >= 2 at the origin")

    @property
    def _xt(self):
        return np.asarray(self.x), np.asarray(self.tail)

    @property
    def left_index(self) -> float:
        x, t = self._xt
        if t[1] <= 0 or t[0] == t[1]:
            return 0.0
        return float(np.log(t[0] / t[1]) / np.log(x[1] / x[0]))

    @property
    def right_rate(self) -> float:
        x, t = self._xt
        if t[-1] <= 0:
            return np.inf
        if t[-2] == t[-1]:
            return np.inf
        return float(np.log(t[-2] / t[-1]) / (x[-1] - x[-2]))

    @property
    def finite_variation(self):
        return self.left_index < 1.0

    def _tail(self, m):
        x, t = self._xt
        m = _as_array(m)
        out = np.interp(m, x, t)
        lo = m < x[0]
        if np.any(lo):
            a = self.left_index
            with np.errstate(divide="ignore"):
                out[lo] = t[0] * (m[lo] / x[0]) ** (-a) if a > 0 else t[0]
        hi = m > x[-1]
        if np.any(hi):
            r = self.right_rate
            out[hi] = 0.0 if not np.isfinite(r) else t[-1] * np.exp(-r * (m[hi] - x[-1]))
        return out

    def _dens(self, m):
        x, t = self._xt
        m = _as_array(m)
        out = np.zeros_like(m)
        inside = (m >= x[0]) & (m <= x[-1])
        if np.any(inside):
            j = np.clip(np.searchsorted(x, m[inside], side="right") - 1, 0, x.size - 2)
            out[inside] = (t[j] - t[j + 1]) / (x[j + 1] - x[j])
        lo = (m > 0) & (m < x[0])
        a = self.left_index
        if np.any(lo) and a > 0:
            out[lo] = a * t[0] * x[0] ** a * m[lo] ** (-a - 1.0)
        hi = m > x[-1]
        r = self.right_rate
        if np.any(hi) and np.isfinite(r):
            out[hi] = r * t[-1] * np.exp(-r * (m[hi] - x[-1]))
        return out

    def tail_plus(self, x):
        return self._tail(x) if self.side > 0 else np.zeros_like(_as_array(x))

    def tail_minus(self, x):
        return self._tail(x) if self.side < 0 else np.zeros_like(_as_array(x))

    cont_tail_plus = tail_plus
    cont_tail_minus = tail_minus
    has_continuous_part = True

    @property
    def _mass(self):
        return np.inf if self.left_index > 0 else self.tail[0]

    @property
    def mass_plus(self):
        return self._mass if self.side > 0 else 0.0

    @property
    def mass_minus(self):
        return self._mass if self.side < 0 else 0.0

    def atoms(self):
        return np.empty(0), np.empty(0)

    def density(self, y):
        y = _as_array(y)
        return self._dens(self.side * y) * (self.side * y > 0)

    def expect(self, g, lo, hi, closed_lo=False, closed_hi=True):
        if self.side > 0:
            a, b = max(lo, 0.0), hi
            f = lambda m: g(m) * self._dens(np.array([m]))[0]
        else:
            a, b = max(-hi, 0.0), -lo
            f = lambda m: g(-m) * self._dens(np.array([m]))[0]
        if b <= a:
            return 0.0
        x = np.asarray(self.x)
        pts = [p for p in x if a < p < min(b, x[-1] + 1)]
        total = 0.0
        edges = [a] + pts + [b]
        for p, q in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, p, q, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
        return total

    def abs_moment_beyond(self, side, lo=1.0):
        if side != self.side:
            return 0.0
        return self.expect(lambda m: np.abs(m), lo, np.inf) if side > 0 else self.expect(np.abs, -np.inf, -lo)

    def log_moment(self):
        return self.expect(np.log, 1.0, np.inf) if self.side > 0 else 0.0

    def scaled(self, c):
        return Tabulated(self.x, tuple((c * np.asarray(self.tail)).tolist()), self.side)

    def components(self):
        if not np.isfinite(self._mass):
            raise PreconditionViolated("cannot simulate a tabulated measure of infinite mass")
        if self._mass == 0:
            return []
        return [(float(self._mass), _TabulatedLaw(self), None)]

    def to_dict(self):
        return {"type": "Tabulated", "x": list(self.x), "tail": list(self.tail), "side": self.side}


class _TabulatedLaw:
    """Normalised jump law of a finite :class:`Tabulated` measure (simulation only)."""

    is_atomic = False

    def __init__(self, meas: Tabulated):
        self.meas = meas

    def sampler(self):
        from .jumps import KIND_TABLE

        x, t = self.meas._xt
        mass = t[0]
        xs = np.concatenate([[0.0], x])
        levels = 1.0 - np.concatenate([[mass], t]) / mass
        r = self.meas.right_rate
        if np.isfinite(r) and t[-1] > 0:
            extra = x[-1] + np.linspace(0, 40.0 / r, 400)[1:]
            xs = np.concatenate([xs, extra])
            levels = np.concatenate([levels, 1.0 - self.meas._tail(extra) / mass])
        # on a flat stretch of the CDF keep its right end, where the jumps begin
        keep = np.concatenate([np.diff(levels) > 0, [True]])
        xs, levels = xs[keep], levels[keep]
        if self.meas.side < 0:
            return KIND_TABLE, (-1.0,), xs, levels
        return KIND_TABLE, (), xs, levels


@dataclass(frozen=True)
class ImageOfPositive(LevyMeasure):
    """Image of a measure on ``(0, inf)`` under ``s -> -log(1 + phi s)``.

    This is the jump measure of ``xi`` in the GOU form of a COGARCH model.
    """

    base: LevyMeasure
    phi: float

    def __post_init__(self):
        if not self.phi > 0:
            raise ValueError("phi must be positive")
        if self.base.mass_minus > 0:
            raise ValueError("base measure must live on (0, inf)")

    def _s(self, x):
        return np.expm1(_as_array(x)) / self.phi

    def tail_plus(self, x):
        return np.zeros_like(_as_array(x))

    cont_tail_plus = tail_plus

    def tail_minus(self, x):
        return self.base.tail_plus(self._s(x))

    def cont_tail_minus(self, x):
        return self.base.cont_tail_plus(self._s(x))

    mass_plus = property(lambda self: 0.0)

    @property
    def mass_minus(self):
        return self.base.mass_plus

    @property
    def has_continuous_part(self):
        return self.base.has_continuous_part

    def atoms(self):
        v, w = self.base.atoms()
        keep = v > 0
        return -np.log1p(self.phi * v[keep]), w[keep]

    def density(self, y):
        y = _as_array(y)
        out = np.zeros_like(y)
        neg = y < 0
        if np.any(neg):
            s = np.expm1(-y[neg]) / self.phi
            out[neg] = self.base.density(s) * np.exp(-y[neg]) / self.phi
        return out

    def expect(self, g, lo, hi, closed_lo=False, closed_hi=True):
        # y in (lo, hi]  <=>  s in [expm1(-hi)/phi, expm1(-lo)/phi)
        s_lo = np.expm1(-hi) / self.phi if np.isfinite(hi) else -1.0 / self.phi
        s_hi = np.expm1(-lo) / self.phi if np.isfinite(lo) else np.inf
        gs = lambda s: g(-np.log1p(self.phi * _as_array(s)))
        return self.base.expect(gs, max(s_lo, 0.0), s_hi, closed_lo=closed_hi, closed_hi=closed_lo)

    def abs_moment_beyond(self, side, lo=1.0):
        if side > 0:
            return 0.0
        if not np.isfinite(self.base.log_moment()):
            return float("inf")
        return self.expect(lambda y: -y, -np.inf, -lo, closed_hi=False)

    def log_moment(self):
        return 0.0

    def scaled(self, c):
        return ImageOfPositive(self.base.scaled(c), self.phi)

    def components(self):
        return [(r, law, self.phi) for r, law, phi in self.base.components() if phi is None]

    def to_dict(self):
        return {"type": "ImageOfPositive", "base": self.base.to_dict(), "phi": self.phi}


@dataclass(frozen=True)
class SumMeasure(LevyMeasure):
    """Finite sum of measures."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def _sum(self, name, x):
        return sum((getattr(p, name)(x) for p in self.parts), np.zeros_like(_as_array(x)))

    def tail_plus(self, x):
        return self._sum("tail_plus", x)

    def tail_minus(self, x):
        return self._sum("tail_minus", x)

    def cont_tail_plus(self, x):
        return self._sum("cont_tail_plus", x)

    def cont_tail_minus(self, x):
        return self._sum("cont_tail_minus", x)

    def density(self, y):
        return self._sum("density", y)

    @property
    def finite_variation(self):
        return all(p.finite_variation for p in self.parts)

    @property
    def mass_plus(self):
        return float(sum(p.mass_plus for p in self.parts))

    @property
    def mass_minus(self):
        return float(sum(p.mass_minus for p in self.parts))

    @property
    def has_continuous_part(self):
        return any(p.has_continuous_part for p in self.parts)

    def atoms(self):
        vs, ws = zip(*(p.atoms() for p in self.parts)) if self.parts else ((), ())
        if not vs:
            return np.empty(0), np.empty(0)
        return np.concatenate(vs), np.concatenate(ws)

    def expect(self, g, lo, hi, closed_lo=False, closed_hi=True):
        return float(sum(p.expect(g, lo, hi, closed_lo, closed_hi) for p in self.parts))

    def abs_moment_beyond(self, side, lo=1.0):
        return float(sum(p.abs_moment_beyond(side, lo) for p in self.parts))

    def log_moment(self):
        return float(sum(p.log_moment() for p in self.parts))

    def laplace_part(self, u):
        return sum((p.laplace_part(u) for p in self.parts), np.zeros_like(np.atleast_1d(_as_array(u))))

    def scaled(self, c):
        return SumMeasure(tuple(p.scaled(c) for p in self.parts))

    def components(self):
        return [c for p in self.parts for c in p.components()]

    def to_dict(self):
        return {"type": "Sum", "parts": [p.to_dict() for p in self.parts]}


def point_masses(locations: Sequence[float], weights: Sequence[float]) -> LevyMeasure:
    """Atomic measure with the given (unnormalised) weights."""
    w = np.asarray(weights, dtype=float)
    if w.sum() == 0:
        return Zero()
    return CompoundPoisson(float(w.sum()), PointMasses(tuple(locations), tuple(w)))


def measure_from_dict(d: dict) -> LevyMeasure:
    kind = d.get("type")
    if kind == "Zero":
        return Zero()
    if kind == "CompoundPoisson":
        return CompoundPoisson(float(d["rate"]), law_from_dict(d["jumps"]))
    if kind == "ExponentialTail":
        return ExponentialTail(float(d["k"]), float(d["theta"]), int(d.get("side", 1)))
    if kind == "Tabulated":
        return Tabulated(tuple(d["x"]), tuple(d["tail"]), int(d.get("side", 1)))
    if kind == "ImageOfPositive":
        return ImageOfPositive(measure_from_dict(d["base"]), float(d["phi"]))
    if kind == "Sum":
        return SumMeasure(tuple(measure_from_dict(p) for p in d["parts"]))
    raise ValueError(f"unknown measure type {kind!r}")


# ---------------------------------------------------------------------------
# Processes


@dataclass(frozen=True)
class CharacteristicTriplet:
    """Lévy process ``xi`` with drift ``gamma``, Gaussian variance ``sigma2`` and jumps ``nu``."""

    gamma: float
    sigma2: float = 0.0
    nu: LevyMeasure = field(default_factory=Zero)

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")

    def to_dict(self):
        return {"gamma": self.gamma, "sigma2": self.sigma2, "nu": self.nu.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d.get("gamma", 0.0)), float(d.get("sigma2", 0.0)), measure_from_dict(d.get("nu", {"type": "Zero"})))


@dataclass(frozen=True)
class SubordinatorSpec:
    """Subordinator ``eta_t = drift * t + (jumps with measure nu on (0, inf))``."""

    drift: float = 0.0
    nu: LevyMeasure = field(default_factory=Zero)

    def __post_init__(self):
        if self.drift < 0:
            raise ValueError("drift must be non-negative")
        if self.nu.mass_minus > 0:
            raise ValueError("a subordinator has no negative jumps")

    @property
    def is_zero(self) -> bool:
        return self.drift == 0 and self.nu.is_zero

    def psi(self, u):
        u = np.atleast_1d(_as_array(u))
        return self.drift * u + self.nu.laplace_part(u)

    def to_dict(self):
        return {"drift": self.drift, "nu": self.nu.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d.get("drift", 0.0)), measure_from_dict(d.get("nu", {"type": "Zero"})))


@dataclass(frozen=True)
class COGARCHSpec:
    """COGARCH(1,1) volatility parameters with driving jump measure ``nu_S``."""

    beta: float
    eta: float
    phi: float
    nu_S: LevyMeasure

    def __post_init__(self):
        if not (self.beta > 0 and self.eta > 0 and self.phi > 0):
            raise ValueError("beta, eta and phi must be positive")

    def to_dict(self):
        return {"beta": self.beta, "eta": self.eta, "phi": self.phi, "nuS": self.nu_S.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["beta"]), float(d["eta"]), float(d["phi"]), measure_from_dict(d["nuS"]))


def gamma0(xi: CharacteristicTriplet) -> float:
    """Drift after removing compensation: ``gamma - int_[-1,1] x nu(dx)``."""
    if not xi.nu.finite_variation:
        raise SmallJumpsNotIntegrable("jumps are not summable near the origin")
    return float(xi.gamma - xi.nu.expect(lambda x: x, -1.0, 1.0, closed_lo=True, closed_hi=True))


def mean_xi(xi: CharacteristicTriplet) -> float:
    """``E xi_1 = gamma + int_{|x|>1} x nu(dx)``, possibly infinite."""
    pos = xi.nu.abs_moment_beyond(+1, 1.0)
    neg = xi.nu.abs_moment_beyond(-1, 1.0)
    if np.isinf(pos) and np.isinf(neg):
        raise MeanUndefined("both large-jump first moments are infinite")
    if np.isinf(pos):
        return float("inf")
    if np.isinf(neg):
        return float("-inf")
    return float(xi.gamma + pos - neg)


class Convergence(str, enum.Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    UNKNOWN = "Unknown"


def convergence_check(xi: CharacteristicTriplet, eta: SubordinatorSpec) -> Convergence:
    """Sufficient test for almost sure convergence of the exponential functional.

    ``Converges`` needs ``E xi_1 > 0`` and a finite log moment of ``nu_eta``.
    ``Diverges`` is returned only for ``E xi_1 < 0``.  Everything else,
    including the borderline ``E xi_1 = 0``, is ``Unknown``.
    """
    if eta.is_zero:
        return Convergence.CONVERGES
    try:
        m = mean_xi(xi)
    except MeanUndefined:
        return Convergence.UNKNOWN
    if m < 0:
        return Convergence.DIVERGES
    if m == 0:
        return Convergence.UNKNOWN
    if np.isfinite(eta.nu.log_moment()):
        return Convergence.CONVERGES
    return Convergence.UNKNOWN


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self):
        if self.is_point:
            return f"{{{self.lo!r}}}"
        return f"[{self.lo!r}, {'inf' if np.isinf(self.hi) else repr(self.hi)}]"


def _require_convergent(xi, eta):
    verdict = convergence_check(xi, eta)
    if verdict is not Convergence.CONVERGES:
        raise PreconditionViolated(f"exponential functional not known to converge ({verdict.value})")


def support_of_functional(xi: CharacteristicTriplet, eta: SubordinatorSpec) -> Interval:
    """Support of the law of ``V = int exp(-xi_{s-}) d eta_s``."""
    _require_convergent(xi, eta)
    if xi.sigma2 > 0:
        return Interval(0.0, np.inf)
    g0 = gamma0(xi)
    a = eta.drift
    no_up = xi.nu.mass_plus == 0
    no_down = xi.nu.mass_minus == 0
    if no_up and no_down and eta.nu.is_zero:
        return Interval(a / g0, a / g0)
    if no_up and g0 > 0:
        return Interval(a / g0, np.inf)
    if no_down and eta.nu.is_zero and g0 > 0:
        return Interval(0.0, a / g0)
    return Interval(0.0, np.inf)


def cogarch_to_gou(spec: COGARCHSpec):
    """Pair ``(xi, eta)`` whose functional is the stationary COGARCH volatility."""
    nu_xi = ImageOfPositive(spec.nu_S, spec.phi)
    log_moment = nu_xi.abs_moment_beyond(-1, 0.0)
    if not log_moment < spec.eta * (1.0 - 1e-12):
        raise NotStationary(
            f"int log(1 + phi y) nu_S(dy) = {log_moment!r} is not below eta = {spec.eta!r}",
            witness=log_moment,
        )
    small = nu_xi.expect(lambda x: x, -1.0, 0.0, closed_lo=True, closed_hi=False)
    xi = CharacteristicTriplet(gamma=spec.eta + small, sigma2=0.0, nu=nu_xi)
    return xi, SubordinatorSpec(drift=spec.beta, nu=Zero())


# ---------------------------------------------------------------------------
# Process specification files


@dataclass(frozen=True)
class ProcessSpec:
    """Either a pair ``(xi, eta)`` or a COGARCH parameter set."""

    xi: CharacteristicTriplet | None = None
    eta: SubordinatorSpec | None = None
    cogarch: COGARCHSpec | None = None
    extra: dict = field(default_factory=dict)

    def pair(self):
        if self.cogarch is not None:
            return cogarch_to_gou(self.cogarch)
        return self.xi, self.eta

    def to_dict(self) -> dict:
        if self.cogarch is not None:
            d = {"cogarch": self.cogarch.to_dict()}
        else:
            d = {"xi": self.xi.to_dict(), "eta": self.eta.to_dict()}
        d.update(self.extra)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        extra = {k: v for k, v in d.items() if k not in ("xi", "eta", "cogarch")}
        if "cogarch" in d:
            return cls(cogarch=COGARCHSpec.from_dict(d["cogarch"]), extra=extra)
        if "xi" not in d or "eta" not in d:
            raise ValueError("process spec needs 'xi' and 'eta', or 'cogarch'")
        return cls(CharacteristicTriplet.from_dict(d["xi"]), SubordinatorSpec.from_dict(d["eta"]), extra=extra)
