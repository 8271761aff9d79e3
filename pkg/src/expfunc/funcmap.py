"""From a candidate law ``mu`` and a process ``xi`` to the exponent of ``eta``.

For ``V = int exp(-xi_{s-}) d eta_s`` with law ``mu`` the subordinator
``eta`` is determined by

    psi_eta(u) = (gamma - sigma2/2) u psi'(u) + sigma2/2 u**2 (psi'(u)**2 - psi''(u))
                 + int (exp(psi(u) - psi(u e^{-y})) - 1 - u psi'(u) y 1{|y|<=1}) nu(dy)

and ``mu`` lies in the range of the map exactly when this is a Bernstein
function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bernstein import (
    DEFAULT_ORDER,
    DEFAULT_TOL,
    CMVerdict,
    LaplaceExponent,
    _sign_pattern,
    geometric_grid,
)
from .errors import IntegralDiverged, TailNotSummable
from .levy import CharacteristicTriplet

SMALL_JUMP = 1e-4
_EPS = np.finfo(float).eps


def _jump_term(psi_u, a, y, psi_shift, d1, d2):
    """Integrand of the jump part at jump sizes ``y`` (arrays broadcast)."""
    small = np.abs(y) < SMALL_JUMP
    with np.errstate(over="ignore", invalid="ignore"):
        full = np.expm1(psi_u - psi_shift) - a * y * (np.abs(y) <= 1.0)
    series = 0.5 * y**2 * (a * a - a - d2)
    return np.where(small, series, full)


class PsiEta:
    """Callable ``psi_eta`` with a running estimate of its evaluation error."""

    def __init__(self, xi: CharacteristicTriplet, mu: LaplaceExponent, rel_quad: float = 1e-10):
        self.xi = xi
        self.mu = mu
        self.rel_quad = rel_quad
        self.derivative_source = mu.derivative_source
        locs, weights = xi.nu.atoms()
        keep = weights > 0
        self.locs, self.weights = locs[keep], weights[keep]
        self.has_cont = xi.nu.has_continuous_part

    def _one_cont(self, u, p, p1, p2):
        """Continuous jump integral at one ``u``; returns value and error."""
        nu, mu = self.xi.nu, self.mu
        a = u * p1
        curv = u * u * p2

        def f(y):
            y = float(y)
            dens = float(nu.density(np.array([y]))[0])
            if dens == 0.0:
                return 0.0
            if abs(y) < SMALL_JUMP:
                return dens * 0.5 * y * y * (a * a - a - curv)
            shift = float(mu(np.array([u * np.exp(-y)]))[0])
            return dens * (np.expm1(p - shift) - a * y * (abs(y) <= 1.0))

        total, err = 0.0, 0.0
        pieces = []
        if nu.mass_minus > 0:
            pieces += [(-np.inf, -1.0), (-1.0, 0.0)]
        if nu.mass_plus > 0:
            pieces += [(0.0, 1.0), (1.0, np.inf)]
        for lo, hi in pieces:
            val, e = integrate.quad(f, lo, hi, limit=200, epsabs=1e-14, epsrel=self.rel_quad)
            total += val
            err += e
        if not np.isfinite(total):
            raise IntegralDiverged(f"jump integral is not finite at u = {u!r}", witness=u)
        return total, err

    def evaluate(self, u):
        u = np.atleast_1d(np.asarray(u, float))
        out = np.zeros_like(u)
        err = np.zeros_like(u)
        pos = u > 0
        if not np.any(pos):
            return out, err
        up = u[pos]
        p = self.mu(up)
        p1 = self.mu.d1(up)
        p2 = self.mu.d2(up)
        g, s2 = self.xi.gamma, self.xi.sigma2
        a = up * p1
        val = (g - 0.5 * s2) * a + 0.5 * s2 * up * up * (p1 * p1 - p2)
        if self.derivative_source == "analytic":
            e1, e2 = 16 * _EPS, 16 * _EPS
        else:
            e1, e2 = 1e-9, 1e-6
        e = np.abs(g - 0.5 * s2) * np.abs(a) * e1 + 0.5 * s2 * up * up * (2 * p1 * p1 * e1 + np.abs(p2) * e2)
        if self.locs.size:
            y = self.locs[None, :]
            shift = self.mu((up[:, None] * np.exp(-y)).ravel()).reshape(up.size, -1)
            terms = _jump_term(p[:, None], a[:, None], y, shift, p1[:, None], (up * up * p2)[:, None])
            jump = terms @ self.weights
            val = val + jump
            e = e + (np.abs(terms) @ self.weights) * 16 * _EPS + np.abs(jump) * (e1 if e1 > 16 * _EPS else 0)
        if self.has_cont:
            extra = np.array([self._one_cont(float(ui), float(pi), float(d1), float(d2))
                              for ui, pi, d1, d2 in zip(up, p, p1, p2)])
            val = val + extra[:, 0]
            e = e + extra[:, 1] + np.abs(extra[:, 0]) * (e1 if e1 > 16 * _EPS else 0)
        out[pos] = val
        err[pos] = e + 16 * _EPS * np.abs(val)
        return out, err

    def __call__(self, u):
        return self.evaluate(u)[0]


def psi_eta_from_mu(xi: CharacteristicTriplet, mu: LaplaceExponent) -> LaplaceExponent:
    """Laplace exponent of the subordinator ``eta`` that would produce ``mu``."""
    f = PsiEta(xi, mu)
    out = LaplaceExponent(f, name=f"psi_eta[{mu.name}]")
    return out


@dataclass(frozen=True)
class RangeVerdict:
    """``InRange``, ``NotInRange`` (with the failing check) or ``Undecided``."""

    outcome: str
    check: CMVerdict
    derivative_source: str
    max_rel_error: float

    @property
    def witness(self):
        return self.check.witness

    def to_dict(self) -> dict:
        d = self.check.to_dict()
        d["outcome"] = {"InRange": "pass", "NotInRange": "fail"}.get(self.outcome, "undecided")
        d["verdict"] = self.outcome
        d["derivative_source"] = self.derivative_source
        return d


def range_membership(xi: CharacteristicTriplet, mu: LaplaceExponent, grid=None,
                     max_order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL) -> RangeVerdict:
    """Decide whether ``mu`` is the law of an exponential functional of ``xi``.

    A failure is reported as ``NotInRange`` only when it survives a noise
    floor of ten times the estimated evaluation error; otherwise the
    answer is ``Undecided``.
    """
    x = geometric_grid() if grid is None else np.asarray(grid, float)
    f = PsiEta(xi, mu)
    vals, err = f.evaluate(x)
    if not np.all(np.isfinite(vals)):
        bad = float(x[~np.isfinite(vals)][0])
        raise IntegralDiverged(f"psi_eta is not finite at u = {bad!r}", witness=bad)
    rel = float(np.max(err / np.maximum(np.abs(vals), 1e-300)))
    orders = range(0, max_order + 2)
    sign_of = lambda m: 1 if m == 0 else (-1) ** (m - 1)
    clean = _sign_pattern(x, vals, orders, sign_of, tol, report_shift=1)
    if clean.passed:
        return RangeVerdict("InRange", CMVerdict(True, max_order), f.derivative_source, rel)
    clean = CMVerdict(False, max(clean.order, 0), clean.witness, clean.margin, clean.detail)
    robust = _sign_pattern(x, vals, orders, sign_of, tol, report_shift=1, noise=10 * err)
    if not robust.passed:
        return RangeVerdict("NotInRange", clean, f.derivative_source, rel)
    return RangeVerdict("Undecided", clean, f.derivative_source, rel)


def poisson_range_forward(lam: float, c: float, mu: LaplaceExponent) -> LaplaceExponent:
    """``psi_eta(u) = lam (exp(psi(u) - psi(u e^{-c})) - 1)`` for ``xi = c N``."""
    q = np.exp(-c)

    def psi(u):
        u = np.asarray(u, float)
        return lam * np.expm1(mu(u) - mu(q * u))

    def dpsi(u):
        u = np.asarray(u, float)
        return lam * np.exp(mu(u) - mu(q * u)) * (mu.d1(u) - q * mu.d1(q * u))

    return LaplaceExponent(psi, dpsi, name=f"poisson_forward[{mu.name}]")


def poisson_range_inverse(lam: float, c: float, psi_eta: LaplaceExponent, tol: float = 1e-14,
                          max_terms: int = 20000) -> LaplaceExponent:
    """``psi_mu(u) = sum_k log(1 + psi_eta(e^{-k c} u) / lam)`` with a geometric tail bound."""
    q = np.exp(-c)

    def series(u, which):
        u = float(u)
        total = 0.0
        prev = None
        for k in range(max_terms):
            v = u * q**k
            pe = float(psi_eta(np.array([v]))[0])
            if which == 0:
                term = np.log1p(pe / lam)
            elif which == 1:
                term = q**k * float(psi_eta.d1(np.array([v]))[0]) / (lam + pe)
            else:
                d1 = float(psi_eta.d1(np.array([v]))[0])
                d2 = float(psi_eta.d2(np.array([v]))[0])
                term = q ** (2 * k) * (d2 / (lam + pe) - (d1 / (lam + pe)) ** 2)
            total += term
            if prev not in (None, 0.0):
                r = abs(term / prev)
                if r < 1 and abs(term) * r / (1 - r) <= tol * max(abs(total), 1e-300):
                    return total
            if term == 0.0 and k > 0:
                return total
            prev = term
        raise TailNotSummable(f"series did not settle at u = {u!r}", witness=u)

    def make(which):
        def f(u):
            u = np.atleast_1d(np.asarray(u, float))
            return np.array([series(v, which) if v > 0 else (0.0 if which == 0 else series(1e-300, which)) for v in u])
        return f

    return LaplaceExponent(make(0), make(1), make(2), f"poisson_inverse[{psi_eta.name}]")
