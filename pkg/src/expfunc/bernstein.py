"""Bernstein functions, completely monotone tests and class membership.

The numerical core is :func:`is_completely_monotone`.  It evaluates a
function on a geometric grid and checks the sign pattern of divided
differences of every order up to ``max_order``.  Each divided difference
is compared against a noise scale computed by running the same recursion
on ``|g|``; only violations larger than ``tol`` times that scale count.
A failure is therefore certified up to floating point, while a pass only
means "no violation visible at this resolution".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import (
    DensityUnavailable,
    EvaluationFailed,
    KUnavailable,
    LogMomentInfinite,
    NotAnchoredAtZero,
    NotSelfdecomposableRepr,
    RepresentationNotRecoverable,
    TailNotSummable,
)
from .levy import ExponentialTail, LevyMeasure, SubordinatorSpec, SumMeasure, Tabulated, Zero

DEFAULT_ORDER = 8
DEFAULT_TOL = 1e-7
# c values sampled when a property is stated for every c
FACTOR_CS = (0.25, 0.5, 0.75, 4.0 / 3.0, 2.0, 4.0)


def geometric_grid(lo: float = 1e-3, hi: float = 1e3, n: int = 200) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def _evaluate(g: Callable, x: np.ndarray, allow_nonfinite: bool = False) -> np.ndarray:
    with np.errstate(all="ignore"):
        try:
            vals = np.asarray(g(x), dtype=float)
            if vals.shape != x.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([float(g(xi)) for xi in x])
    if not allow_nonfinite and not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)][0]
        raise EvaluationFailed(f"non-finite value at x = {bad!r}")
    return vals


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class CMVerdict:
    """Outcome of a sign-pattern test.

    ``passed`` with ``order = n`` means every order up to ``n`` was clean.
    Otherwise ``order`` is the lowest failing order and ``witness`` the
    (geometric) centre of the first failing window.  ``margin`` is the
    size of the violation relative to the noise scale of that window.
    """

    passed: bool
    order: int
    witness: float | None = None
    margin: float = float("inf")
    detail: str = ""

    @property
    def outcome(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        d = {"outcome": self.outcome, "order": self.order}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


def _sign_pattern(x: np.ndarray, g: np.ndarray, orders, sign_of: Callable[[int], int], tol: float,
                  report_shift: int = 0, noise: np.ndarray | None = None) -> CMVerdict:
    """Check ``sign_of(n) * (n-th divided difference) >= -tol * scale`` for ``n`` in ``orders``.

    ``noise`` is an optional absolute error bound on each value; it is
    propagated through the same recursion as the scale.
    """
    last = None
    floor = np.zeros_like(g) if noise is None else np.asarray(noise, float)
    for n in orders:
        s = sign_of(n)
        if n == 0:
            viol = -s * g - tol * np.abs(g) - floor
            bad = np.nonzero(viol > 0)[0]
            if bad.size:
                i = bad[0]
                scale = max(abs(g[i]), np.finfo(float).tiny)
                return CMVerdict(False, n - report_shift, float(x[i]), float(-s * g[i] / scale),
                                 "negative value")
            last = n
            continue
        best = None
        for stride in sorted({1, max(1, n)}):
            for off in range(stride):
                xs = x[off::stride]
                if xs.size <= n:
                    continue
                d = g[off::stride].copy()
                a = np.abs(d)
                e = floor[off::stride].copy()
                for m in range(1, n + 1):
                    span = xs[m:] - xs[:-m]
                    d = (d[1:] - d[:-1]) / span
                    a = (a[1:] + a[:-1]) / span
                    e = (e[1:] + e[:-1]) / span
                viol = -s * d - tol * a - e
                bad = np.nonzero(viol > 0)[0]
                if bad.size:
                    i = bad[0]
                    centre = float(np.sqrt(xs[i] * xs[i + n]))
                    margin = float(-s * d[i] / a[i]) if a[i] > 0 else float("inf")
                    if best is None or centre < best[0]:
                        best = (centre, margin)
        if best is not None:
            return CMVerdict(False, n - report_shift, best[0], best[1], "sign violation")
        last = n
    return CMVerdict(True, (last if last is not None else 0) - report_shift)


def is_completely_monotone(g: Callable, grid=None, max_order: int = DEFAULT_ORDER,
                           tol: float = DEFAULT_TOL) -> CMVerdict:
    """Test ``(-1)**n g^(n) >= 0`` for ``n = 0..max_order`` on ``grid``."""
    x = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    vals = _evaluate(g, x, allow_nonfinite=True)
    finite = np.isfinite(vals)
    cut = x.size if finite.all() else int(np.argmin(finite))
    noise = g.noise(x[:cut]) if hasattr(g, "noise") else None
    verdict = _sign_pattern(x[:cut], vals[:cut], range(0, max_order + 1), lambda n: (-1) ** n, tol, noise=noise)
    if cut < x.size and verdict.passed:
        # A violation on the finite part would already be certified; without one we cannot conclude.
        raise EvaluationFailed(f"non-finite value at x = {float(x[cut])!r}")
    return verdict


def cm_exp_ratio_derivative(lam: float, n: int, x):
    """``n``-th derivative of ``(1 - exp(-lam x)) / x`` in closed form."""
    x = np.asarray(x, dtype=float)
    return (-1) ** n * special.factorial(n) * x ** (-(n + 1.0)) * special.gammainc(n + 1, lam * x)


# ---------------------------------------------------------------------------
# Laplace exponents


@dataclass(frozen=True)
class BernsteinRepr:
    """Known structure of an infinitely divisible law on ``[0, inf)``.

    ``density`` is the Lévy density ``m``; ``k`` is the function with
    ``m(t) = k(t) / t``; ``driving`` is the Lévy measure whose tail is ``k``
    and ``driving_density`` its density ``-k'``.
    """

    drift: float = 0.0
    measure: LevyMeasure | None = None
    density: Callable | None = None
    k: Callable | None = None
    k0: float | None = None
    driving: LevyMeasure | None = None
    driving_density: Callable | None = None


@dataclass(frozen=True)
class LaplaceExponent:
    """``psi(u) = -log E exp(-u X)`` with optional analytic derivatives."""

    psi: Callable
    dpsi: Callable | None = None
    d2psi: Callable | None = None
    name: str = ""
    repr: BernsteinRepr | None = None

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.asarray(self.psi(u), dtype=float)

    @property
    def derivative_source(self) -> str:
        return "analytic" if self.dpsi is not None and self.d2psi is not None else "numeric"

    def d1(self, u):
        u = np.asarray(u, dtype=float)
        if self.dpsi is not None:
            return np.asarray(self.dpsi(u), dtype=float)
        h = 1e-3 * np.maximum(u, 1e-8)
        c1 = (self(u + h) - self(u - h)) / (2 * h)
        c2 = (self(u + h / 2) - self(u - h / 2)) / h
        return (4 * c2 - c1) / 3

    def d2(self, u):
        u = np.asarray(u, dtype=float)
        if self.d2psi is not None:
            return np.asarray(self.d2psi(u), dtype=float)
        if self.dpsi is not None:
            h = 1e-4 * np.maximum(u, 1e-8)
            return (self.d1(u + h) - self.d1(u - h)) / (2 * h)
        h = 1e-4 * np.maximum(u, 1e-8)
        return (self(u + h) - 2 * self(u) + self(u - h)) / h**2

    def scaled(self, c: float) -> "LaplaceExponent":
        """Exponent of ``c X``."""
        d1 = None if self.dpsi is None else (lambda u: c * self.dpsi(c * np.asarray(u, float)))
        d2 = None if self.d2psi is None else (lambda u: c * c * self.d2psi(c * np.asarray(u, float)))
        return LaplaceExponent(lambda u: self.psi(c * np.asarray(u, float)), d1, d2, f"{self.name}*{c}")


def is_bernstein(psi, grid=None, max_order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL) -> CMVerdict:
    """Check ``psi(0) = 0``, ``psi >= 0`` and that ``psi'`` is completely monotone.

    Orders refer to derivatives of ``psi'``.  Without an analytic
    derivative the test runs on divided differences of ``psi`` itself.
    """
    x = geometric_grid() if grid is None else np.asarray(grid, dtype=float)
    vals = _evaluate(psi, x)
    at0 = float(np.asarray(psi(np.array([0.0])), dtype=float).ravel()[0])
    if not abs(at0) <= 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
        raise NotAnchoredAtZero(f"psi(0) = {at0!r}", witness=0.0)
    base = _sign_pattern(x, vals, [0], lambda n: 1, tol)
    if not base.passed:
        return base
    dpsi = getattr(psi, "dpsi", None)
    if dpsi is not None:
        return is_completely_monotone(dpsi, x, max_order, tol)
    return _sign_pattern(x, vals, range(1, max_order + 2), lambda m: (-1) ** (m - 1), tol, report_shift=1)


def _u_times_derivative(mu: LaplaceExponent) -> LaplaceExponent:
    def phi(u):
        u = np.asarray(u, float)
        pos = u > 0
        out = np.zeros_like(u)
        out[pos] = u[pos] * mu.d1(u[pos])
        return out

    if mu.d2psi is not None:
        return LaplaceExponent(phi, _SumWithNoise(mu), name=f"u*{mu.name}'")
    return LaplaceExponent(phi, name=f"u*{mu.name}'")


class _SumWithNoise:
    """``psi' + u psi''`` together with a bound on its cancellation error."""

    def __init__(self, mu: LaplaceExponent):
        self.mu = mu

    def __call__(self, u):
        u = np.asarray(u, float)
        return self.mu.d1(u) + u * self.mu.d2(u)

    def noise(self, u):
        u = np.asarray(u, float)
        return 64 * np.finfo(float).eps * (np.abs(self.mu.d1(u)) + np.abs(u * self.mu.d2(u)))


def is_selfdecomposable(mu: LaplaceExponent, grid=None, max_order: int = DEFAULT_ORDER,
                        tol: float = DEFAULT_TOL) -> CMVerdict:
    """Selfdecomposable exactly when ``u psi'(u)`` is a Bernstein function."""
    return is_bernstein(_u_times_derivative(mu), grid, max_order, tol)


def is_complete_bernstein(mu: LaplaceExponent, grid=None, max_order: int = DEFAULT_ORDER,
                          tol: float = DEFAULT_TOL) -> CMVerdict:
    """Complete Bernstein exactly when the Lévy density is completely monotone."""
    if mu.repr is None or mu.repr.density is None:
        raise DensityUnavailable(f"no Lévy density known for {mu.name or 'this law'}")
    return is_completely_monotone(mu.repr.density, grid, max_order, tol)


def is_ggc(mu: LaplaceExponent, grid=None, max_order: int = DEFAULT_ORDER,
           tol: float = DEFAULT_TOL) -> CMVerdict:
    """Generalized gamma convolution exactly when ``k`` is completely monotone."""
    if mu.repr is None or mu.repr.k is None:
        raise KUnavailable(f"no k-function known for {mu.name or 'this law'}")
    return is_completely_monotone(mu.repr.k, grid, max_order, tol)


# ---------------------------------------------------------------------------
# Factors and representation maps


class _ScaledDifference:
    """``hi psi'(hi u) - lo psi'(lo u)`` together with a bound on its cancellation error."""

    def __init__(self, mu: LaplaceExponent, lo: float, hi: float):
        self.mu, self.lo, self.hi = mu, lo, hi

    def _terms(self, u):
        u = np.asarray(u, float)
        return self.hi * self.mu.d1(self.hi * u), self.lo * self.mu.d1(self.lo * u)

    def __call__(self, u):
        a, b = self._terms(u)
        return a - b

    def noise(self, u):
        a, b = self._terms(u)
        return 64 * np.finfo(float).eps * (np.abs(a) + np.abs(b))


def c_factor(mu: LaplaceExponent, c: float) -> LaplaceExponent:
    """Exponent of the factor ``mu_c``.

    For ``0 < c < 1`` this is ``psi(u) - psi(c u)`` so that ``X = c X' + Y``.
    For ``c > 1`` it is ``psi(c u) - psi(u)`` so that ``c X = X' + Y``.
    When ``k`` is known the factor carries its Lévy density and drift.
    """
    if c <= 0 or c == 1:
        raise ValueError("c must be positive and different from 1")
    lo, hi = (c, 1.0) if c < 1 else (1.0, c)
    psi = lambda u: mu(hi * np.asarray(u, float)) - mu(lo * np.asarray(u, float))
    dpsi = _ScaledDifference(mu, lo, hi)
    d2psi = lambda u: hi**2 * mu.d2(hi * np.asarray(u, float)) - lo**2 * mu.d2(lo * np.asarray(u, float))
    rep = None
    if mu.repr is not None and mu.repr.k is not None:
        k = mu.repr.k

        def g_c(t, k=k):
            t = np.asarray(t, float)
            return (k(t / hi) - k(t / lo)) / t

        rep = BernsteinRepr(drift=mu.repr.drift * (hi - lo), density=g_c, k0=mu.repr.k0)
    return LaplaceExponent(psi, dpsi, d2psi if mu.dpsi is not None else None, f"{mu.name}_c{c}", rep)


def factors_are_bernstein(mu: LaplaceExponent, cs=FACTOR_CS, grid=None, max_order: int = DEFAULT_ORDER,
                          tol: float = DEFAULT_TOL) -> CMVerdict:
    """Check that every c-factor exponent for ``c`` in ``cs`` is a Bernstein function.

    A pass covers only the sampled ``c``.  A failure names the first
    offending ``c`` in ``detail``.
    """
    last = max_order
    for c in cs:
        v = is_bernstein(c_factor(mu, c), grid, max_order, tol)
        if not v.passed:
            return replace(v, detail=f"c = {c!r}")
        last = min(last, v.order)
    return CMVerdict(True, last, detail=f"c in {tuple(cs)!r}")


def semi_sd_synthesize(mu_c: LaplaceExponent, c: float, tol: float = 1e-12, max_terms: int = 5000) -> LaplaceExponent:
    """Rebuild ``psi`` from a factor exponent via ``psi(u) = sum_n psi_c(c**n u)``."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")

    def one(u):
        total, prev, ratios = 0.0, None, []
        for n in range(max_terms):
            term = float(mu_c(np.array([u * c**n]))[0])
            total += term
            if prev is not None and prev > 0:
                ratios.append(term / prev)
            prev = term
            if len(ratios) >= 3:
                r = max(ratios[-3:])
                if r >= 1.0 - 1e-9:
                    continue
                if term * r / (1.0 - r) <= tol * max(abs(total), 1e-300):
                    return total
            if term == 0.0:
                return total
        raise TailNotSummable(f"series did not settle after {max_terms} terms at u = {u!r}", witness=u)

    def psi(u):
        u = np.atleast_1d(np.asarray(u, float))
        return np.array([one(float(v)) if v > 0 else 0.0 for v in u])

    return LaplaceExponent(psi, name=f"synth({mu_c.name})")


@dataclass(frozen=True)
class ExpSum:
    """Completely monotone ``k(t) = sum_j w_j exp(-x_j t)``."""

    rates: tuple
    weights: tuple

    def __call__(self, t):
        t = np.asarray(t, float)
        return np.sum(np.asarray(self.weights) * np.exp(-np.multiply.outer(t, np.asarray(self.rates))), axis=-1)

    def minus_derivative(self, t):
        t = np.asarray(t, float)
        x, w = np.asarray(self.rates), np.asarray(self.weights)
        return np.sum(w * x * np.exp(-np.multiply.outer(t, x)), axis=-1)


def sd_to_driving(mu: LaplaceExponent, grid=None) -> SubordinatorSpec:
    """Driving subordinator ``X`` of a selfdecomposable law (tail of ``nu_X`` equals ``k``)."""
    rep = mu.repr
    if rep is None or rep.k is None:
        raise KUnavailable(f"no k-function known for {mu.name or 'this law'}")
    t = geometric_grid(1e-6, 1e3, 400) if grid is None else np.asarray(grid, float)
    kv = _evaluate(rep.k, t)
    rises = np.nonzero(np.diff(kv) > 1e-12 * np.maximum(np.abs(kv[:-1]), 1e-300))[0]
    if rises.size:
        raise NotSelfdecomposableRepr("k increases", witness=float(t[rises[0] + 1]))
    if rep.driving is not None:
        return SubordinatorSpec(rep.drift, rep.driving)
    keep = kv > 0
    if keep.sum() < 2:
        return SubordinatorSpec(rep.drift, Zero())
    return SubordinatorSpec(rep.drift, Tabulated(tuple(t[keep]), tuple(kv[keep]), 1))


def _psi_x(X):
    """Callable exponent and derivative of a subordinator given in either form."""
    if isinstance(X, LaplaceExponent):
        return X, X.d1
    nu, a = X.nu, X.drift

    def d1(u):
        u = np.atleast_1d(np.asarray(u, float))
        if isinstance(nu, Zero):
            return np.full_like(u, a)
        return a + np.array([nu.expect(lambda t, s=s: t * np.exp(-s * t), 0.0, np.inf) for s in u])

    return (lambda u: X.psi(u)), d1


def exp_map_unit_drift(X) -> LaplaceExponent:
    """Law of ``int_0^inf exp(-t) dX_t``: ``psi_mu(u) = int_0^u psi_X(v) / v dv``."""
    if isinstance(X, SubordinatorSpec) and not np.isfinite(X.nu.log_moment()):
        raise LogMomentInfinite("int_1^inf log t nu_X(dt) diverges")
    psi_x, dpsi_x = _psi_x(X)
    f = lambda v: float(psi_x(np.array([v]))[0]) / v if v > 0 else float(dpsi_x(np.array([1e-300]))[0])

    def psi(u):
        u = np.atleast_1d(np.asarray(u, float))
        order = np.argsort(u)
        out = np.empty_like(u)
        acc, prev = 0.0, 0.0
        for i in order:
            if u[i] > prev:
                acc += integrate.quad(f, prev, u[i], limit=200, epsabs=1e-15, epsrel=1e-13)[0]
                prev = u[i]
            out[i] = acc
        return out

    def dpsi(u):
        u = np.asarray(u, float)
        return np.asarray(psi_x(u), float).reshape(u.shape) / u

    def d2psi(u):
        u = np.asarray(u, float)
        return (np.asarray(dpsi_x(u), float).reshape(u.shape) - dpsi(u)) / u

    rep = None
    if isinstance(X, SubordinatorSpec):
        rep = BernsteinRepr(drift=X.drift, k=X.nu.tail_plus, k0=X.nu.mass_plus, driving=X.nu,
                            density=lambda t: X.nu.tail_plus(t) / np.asarray(t, float))
    return LaplaceExponent(psi, dpsi, d2psi, "exp_map", rep)


@dataclass(frozen=True)
class StieltjesRepr:
    """Stieltjes measure ``rho`` of a complete Bernstein ``psi_X``.

    ``psi_X(u) = drift u + int u / (u + x) rho(dx)`` and the matching
    k-function is ``k(t) = int exp(-t x) rho(dx)``.  ``rho`` is atomic here.
    """

    drift: float = 0.0
    atoms: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.atoms, float)
        w = np.asarray(self.weights, float)
        if x.shape != w.shape or np.any(x <= 0) or np.any(w < 0):
            raise ValueError("atoms must be positive with non-negative weights")
        object.__setattr__(self, "atoms", tuple(x.tolist()))
        object.__setattr__(self, "weights", tuple(w.tolist()))

    def psi_x(self) -> LaplaceExponent:
        x, w, a = np.asarray(self.atoms), np.asarray(self.weights), self.drift

        def psi(u):
            u = np.asarray(u, float)
            return a * u + np.sum(w * (u[..., None] / (u[..., None] + x)), axis=-1)

        def dpsi(u):
            u = np.asarray(u, float)
            return a + np.sum(w * x / (u[..., None] + x) ** 2, axis=-1)

        def d2psi(u):
            u = np.asarray(u, float)
            return np.sum(-2 * w * x / (u[..., None] + x) ** 3, axis=-1)

        meas = SumMeasure(tuple(ExponentialTail(wi, xi) for xi, wi in zip(x, w)))
        rep = BernsteinRepr(drift=a, measure=meas, density=ExpSum(tuple(x), tuple(w * x)))
        return LaplaceExponent(psi, dpsi, d2psi, "stieltjes", rep)


def bo_to_ggc(rho: StieltjesRepr) -> LaplaceExponent:
    """GGC law whose driving subordinator has Stieltjes measure ``rho``."""
    x, w, a = np.asarray(rho.atoms), np.asarray(rho.weights), rho.drift
    k = ExpSum(tuple(x), tuple(w))

    def psi(u):
        u = np.asarray(u, float)
        return a * u + np.sum(w * np.log1p(u[..., None] / x), axis=-1)

    def dpsi(u):
        u = np.asarray(u, float)
        return a + np.sum(w / (u[..., None] + x), axis=-1)

    def d2psi(u):
        u = np.asarray(u, float)
        return -np.sum(w / (u[..., None] + x) ** 2, axis=-1)

    driving = SumMeasure(tuple(ExponentialTail(wi, xi) for xi, wi in zip(x, w)))
    rep = BernsteinRepr(drift=a, density=lambda t: k(t) / np.asarray(t, float), k=k, k0=float(w.sum()),
                        driving=driving, driving_density=k.minus_derivative)
    return LaplaceExponent(psi, dpsi, d2psi, "ggc", rep)


def ggc_to_bo(mu: LaplaceExponent) -> StieltjesRepr:
    """Recover the atomic Stieltjes measure from a GGC built by :func:`bo_to_ggc`."""
    rep = mu.repr
    if rep is None or not isinstance(rep.k, ExpSum):
        raise RepresentationNotRecoverable("k is not a finite exponential sum")
    return StieltjesRepr(rep.drift, rep.k.rates, rep.k.weights)
