"""Closed-form laws on ``[0, inf)`` given by their Laplace exponents."""

from __future__ import annotations

import numpy as np
from scipy import special

from .bernstein import BernsteinRepr, LaplaceExponent, StieltjesRepr, bo_to_ggc
from .levy import ExponentialTail, Zero, point_masses

EULER = float(np.euler_gamma)


def gamma_law(k: float, theta: float) -> LaplaceExponent:
    """Gamma law with shape ``k`` and rate ``theta``: ``psi = k log(1 + u / theta)``."""
    psi = lambda u: k * np.log1p(np.asarray(u, float) / theta)
    dpsi = lambda u: k / (theta + np.asarray(u, float))
    d2psi = lambda u: -k / (theta + np.asarray(u, float)) ** 2
    kfun = lambda t: k * np.exp(-theta * np.asarray(t, float))
    rep = BernsteinRepr(
        drift=0.0,
        density=lambda t: kfun(t) / np.asarray(t, float),
        k=kfun,
        k0=float(k),
        driving=ExponentialTail(k, theta),
        driving_density=lambda t: k * theta * np.exp(-theta * np.asarray(t, float)),
    )
    return LaplaceExponent(psi, dpsi, d2psi, f"Gamma({k},{theta})", rep)


def gamma_stieltjes(k: float, theta: float) -> StieltjesRepr:
    """Stieltjes measure ``k delta_theta`` whose GGC is ``Gamma(k, theta)``."""
    return StieltjesRepr(0.0, (theta,), (k,))


def poisson_law(lam: float, size: float = 1.0) -> LaplaceExponent:
    """Poisson number of jumps of fixed ``size``."""
    psi = lambda u: -lam * np.expm1(-size * np.asarray(u, float))
    dpsi = lambda u: lam * size * np.exp(-size * np.asarray(u, float))
    d2psi = lambda u: -lam * size**2 * np.exp(-size * np.asarray(u, float))
    rep = BernsteinRepr(drift=0.0, measure=point_masses([size], [lam]))
    return LaplaceExponent(psi, dpsi, d2psi, f"Poisson({lam})", rep)


def degenerate_law(a: float) -> LaplaceExponent:
    """Point mass at ``a``."""
    zero = lambda t: np.zeros_like(np.asarray(t, float))
    rep = BernsteinRepr(drift=a, measure=Zero(), density=zero, k=zero, k0=0.0, driving=Zero(),
                        driving_density=zero)
    return LaplaceExponent(lambda u: a * np.asarray(u, float), lambda u: np.full_like(np.asarray(u, float), a),
                           lambda u: np.zeros_like(np.asarray(u, float)), f"delta({a})", rep)


def inverse_gamma_law(alpha: float, beta: float = 1.0) -> LaplaceExponent:
    """Inverse Gamma law with density ``beta**alpha x**(-alpha-1) exp(-beta/x) / Gamma(alpha)``."""
    lg = special.gammaln(alpha)

    def psi(u):
        u = np.asarray(u, float)
        out = np.zeros_like(u)
        pos = u > 0
        z = 2 * np.sqrt(beta * u[pos])
        out[pos] = -np.log(2.0) - 0.5 * alpha * np.log(beta * u[pos]) + lg - np.log(special.kve(alpha, z)) + z
        return out

    def ratio(z):
        return special.kve(alpha - 1, z) / special.kve(alpha, z)

    def dpsi(u):
        u = np.asarray(u, float)
        z = 2 * np.sqrt(beta * u)
        return np.sqrt(beta / u) * ratio(z)

    def d2psi(u):
        u = np.asarray(u, float)
        z = 2 * np.sqrt(beta * u)
        r = ratio(z)
        dr = r * r + (2 * alpha - 1) * r / z - 1.0
        return -dpsi(u) / (2 * u) + beta / u * dr

    return LaplaceExponent(psi, dpsi, d2psi, f"InvGamma({alpha},{beta})")


def _ein(u):
    """Entire exponential integral ``int_0^u (1 - exp(-s)) / s ds``."""
    u = np.asarray(u, float)
    out = np.empty_like(u)
    small = u < 1.0
    if np.any(small):
        v = u[small]
        term = v.copy()
        acc = v.copy()
        for n in range(2, 30):
            term = -term * v / n
            acc += term / n
        out[small] = acc
    big = ~small
    if np.any(big):
        out[big] = special.exp1(u[big]) + EULER + np.log(u[big])
    return out


def step_sd_law() -> LaplaceExponent:
    """Selfdecomposable law with ``k(t) = 1{t <= 1}``; it is not a GGC."""

    def dpsi(u):
        u = np.asarray(u, float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = -np.expm1(-u) / u
        return np.where(u == 0, 1.0, out)

    def d2psi(u):
        u = np.asarray(u, float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (np.exp(-u) * (1 + u) - 1) / u**2
        series = -0.5 + u / 3 - u**2 / 8 + u**3 / 30
        return np.where(u < 1e-3, series, out)

    kfun = lambda t: (np.asarray(t, float) <= 1.0).astype(float)
    rep = BernsteinRepr(drift=0.0, density=lambda t: kfun(t) / np.asarray(t, float), k=kfun, k0=1.0,
                        driving=point_masses([1.0], [1.0]))
    return LaplaceExponent(_ein, dpsi, d2psi, "StepSD", rep)


def _exp_e1(u):
    """``exp(u) E1(u)`` without overflow."""
    u = np.asarray(u, float)
    out = np.empty_like(u)
    small = u <= 50
    out[small] = np.exp(u[small]) * special.exp1(u[small])
    if np.any(~small):
        v = u[~small]
        term = 1.0 / v
        acc = term.copy()
        for n in range(1, 20):
            term = -term * n / v
            acc += term
        out[~small] = acc
    return out


def pareto_ggc_law(M: float = 1.0) -> LaplaceExponent:
    """GGC with ``k(t) = M / (1 + t)``, i.e. Stieltjes density ``M exp(-x)``.

    ``psi(u) = M (exp(u) E1(u) + log u + euler_gamma)`` and the driving
    subordinator has Lévy density ``M / (1 + t)**2``.
    """

    def psi(u):
        u = np.asarray(u, float)
        out = np.zeros_like(u)
        small = (u > 0) & (u < 1)
        v = u[small]
        out[small] = M * (np.exp(v) * _ein(v) - np.expm1(v) * (EULER + np.log(v)))
        big = u >= 1
        out[big] = M * (_exp_e1(u[big]) + np.log(u[big]) + EULER)
        return out

    dpsi = lambda u: M * _exp_e1(u)
    d2psi = lambda u: M * (_exp_e1(u) - 1.0 / np.asarray(u, float))
    kfun = lambda t: M / (1.0 + np.asarray(t, float))
    rep = BernsteinRepr(drift=0.0, density=lambda t: kfun(t) / np.asarray(t, float), k=kfun, k0=float(M),
                        driving_density=lambda t: M / (1.0 + np.asarray(t, float)) ** 2)
    return LaplaceExponent(psi, dpsi, d2psi, f"ParetoGGC({M})", rep)


def law_from_dict(d: dict) -> LaplaceExponent:
    """Build a law from ``{"family": name, ...parameters}``."""
    fam = d.get("family")
    if fam == "gamma":
        return gamma_law(float(d["k"]), float(d["theta"]))
    if fam == "poisson":
        return poisson_law(float(d["lambda"]), float(d.get("size", 1.0)))
    if fam == "degenerate":
        return degenerate_law(float(d["a"]))
    if fam == "inverse_gamma":
        return inverse_gamma_law(float(d["alpha"]), float(d.get("beta", 1.0)))
    if fam == "step_sd":
        return step_sd_law()
    if fam == "pareto_ggc":
        return pareto_ggc_law(float(d.get("M", 1.0)))
    if fam == "ggc":
        return bo_to_ggc(StieltjesRepr(float(d.get("drift", 0.0)), tuple(d["atoms"]), tuple(d["weights"])))
    raise ValueError(f"unknown law family {fam!r}")
