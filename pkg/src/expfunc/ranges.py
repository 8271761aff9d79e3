"""Which selfdecomposable laws are exponential functionals for a given ``xi``.

The membership tests reduce to monotonicity of an explicit profile ``G``:
its increments are then the Lévy measure of the integrator ``eta``.  The
profiles need the distribution functions of the c-factors of ``mu``, which
are compound Poisson when ``k(0+)`` is finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bernstein import LaplaceExponent, StieltjesRepr
from .density import GridConfig
from .errors import (
    DriftCompensationTooSmall,
    EdgeConditionViolated,
    FactorNotCompoundPoisson,
    PreconditionViolated,
    ZeroGaussianPart,
)
from .grids import GridCDF
from .levy import CharacteristicTriplet, SubordinatorSpec, Tabulated, Zero, gamma0

NON_DECREASING = "NonDecreasing"
VIOLATED_AT = "ViolatedAt"


@dataclass
class MonotoneProfile:
    """A profile ``G`` on a grid with its monotonicity verdict.

    When non-decreasing, ``extracted`` is the subordinator with Lévy measure
    ``dG`` and the drift fixed by the profile variant (G1 or G2).
    """

    grid: np.ndarray
    values: np.ndarray
    verdict: str
    witness: float | None = None
    extracted: SubordinatorSpec | None = None
    limit: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict, "meta": self.meta}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.extracted is not None:
            d["eta"] = self.extracted.to_dict()
        return d


# ---------------------------------------------------------------------------
# c-factors as compound Poisson laws


def _factor_parts(mu: LaplaceExponent, c: float):
    rep = mu.repr
    if rep is None or rep.k is None:
        raise PreconditionViolated("mu needs a known k-function (selfdecomposable representation)")
    k0 = rep.k0 if rep.k0 is not None else float(rep.k(np.array([0.0]))[0])
    if not np.isfinite(k0):
        raise FactorNotCompoundPoisson(f"k(0+) = {k0!r}: the factor has infinite Lévy mass")
    return rep.k, float(k0), rep.drift * (c - 1.0), float(k0) * math.log(c)


def _panjer(lam: float, p: np.ndarray) -> np.ndarray:
    """Compound Poisson probabilities for an arithmetic severity ``p`` (``p[j]`` at ``j h``)."""
    n = p.size
    f = np.zeros(n)
    f[0] = math.exp(-lam * (1.0 - p[0]))
    jp = np.arange(n) * p * lam
    for i in range(1, n):
        f[i] = float(jp[1 : i + 1] @ f[i - 1 :: -1]) / i
    return f


def c_factor_cdf(mu: LaplaceExponent, c: float, cfg: GridConfig | None = None) -> GridCDF:
    """CDF of the c-factor ``mu_c`` for ``c > 1``.

    ``mu_c`` is ``a (c - 1)`` plus a compound Poisson sum with rate
    ``lambda_c = k(0+) log c`` and jump density ``(k(t/c) - k(t)) / (t lambda_c)``.
    The sum is evaluated by Panjer's recursion with the jump law rounded up
    and rounded down to the grid; the two bracket the CDF and their average
    is returned.  The atom ``exp(-lambda_c)`` at ``a (c - 1)`` is exact.
    """
    if not c > 1:
        raise ValueError("c must exceed 1")
    cfg = cfg or GridConfig(h=1e-2, t_max=40.0)
    k, k0, a_c, lam = _factor_parts(mu, c)
    h = cfg.h
    n = int(math.ceil((cfg.t_max or 40.0) / h)) + 1
    x = np.arange(n) * h
    if lam == 0.0:
        vals = np.ones(n)
        evaluate = lambda t: (np.asarray(t, float) >= a_c).astype(float)
        return GridCDF(a_c + x, vals, meta={"lambda": 0.0, "atom": 1.0, "atom_at": a_c}, evaluator=evaluate)
    nodes, weights = np.polynomial.legendre.leggauss(8)
    mid = x[:-1] + h / 2
    pts = mid[:, None] + (h / 2) * nodes[None, :]
    tt = pts.ravel()
    gc = (np.asarray(k(tt / c), float) - np.asarray(k(tt), float)) / tt
    cell = (h / 2) * (gc.reshape(pts.shape) @ weights) / lam
    up = np.concatenate([[0.0], cell])  # mass of ((j-1)h, jh] at node j
    down = np.concatenate([cell, [0.0]])  # mass of (jh, (j+1)h] at node j
    F = 0.5 * (np.cumsum(_panjer(lam, up)) + np.cumsum(_panjer(lam, down)))
    atom = math.exp(-lam)
    F[0] = atom
    lost = max(0.0, 1.0 - float(cell.sum()))

    def evaluate(t):
        t = np.asarray(t, float)
        s = t - a_c
        out = np.interp(s, x, F)
        return np.where(s < 0, 0.0, out)

    return GridCDF(a_c + x, np.clip(F, 0.0, 1.0), evaluator=evaluate,
                   meta={"lambda": lam, "atom": atom, "atom_at": a_c, "jump_mass_beyond_grid": lam * lost})


def _open_interval_mass(F: GridCDF, t: np.ndarray) -> np.ndarray:
    """``mu_c((0, t))`` on a grid of ``t``."""
    a_c = F.meta["atom_at"]
    at0 = F.meta["atom"] if a_c == 0.0 else 0.0
    vals = np.asarray(F(t), float)
    # the open interval excludes the atom when t equals its location
    return np.where(t <= a_c, 0.0, vals - at0)


def _xi_nodes(nu, n_cont: int = 48):
    """Quadrature over the negative jumps of ``nu``: list of ``(x < 0, weight)``."""
    out = [(float(x), float(w)) for x, w in zip(*nu.atoms()) if x < 0 and w > 0]
    if nu.has_continuous_part and nu.mass_minus > 0:
        hi = 1.0
        while nu.cont_tail_minus(np.array([hi]))[0] > 1e-12 * max(1.0, nu.cont_tail_minus(np.array([1.0]))[0]) and hi < 1e3:
            hi *= 2
        s_nodes, s_w = np.polynomial.legendre.leggauss(n_cont)
        lo_s, hi_s = math.log(1e-8), math.log(hi)
        s = 0.5 * (hi_s - lo_s) * s_nodes + 0.5 * (hi_s + lo_s)
        m = np.exp(s)
        dens = nu.density(-m)
        w = 0.5 * (hi_s - lo_s) * s_w * dens * m
        out += [(-float(mi), float(wi)) for mi, wi in zip(m, w) if wi > 0]
    return out


def _factor_term(mu, nu, grid, cfg):
    """``int mu_{exp(-x)}((0, t)) nu(dx)`` and its limit as ``t -> inf``."""
    total = np.zeros_like(grid)
    limit = 0.0
    for x, w in _xi_nodes(nu):
        F = c_factor_cdf(mu, math.exp(-x), GridConfig(h=cfg.h, t_max=grid[-1]))
        total += w * _open_interval_mass(F, grid)
        limit += w * (1.0 - (F.meta["atom"] if F.meta["atom_at"] == 0.0 else 0.0))
    return total, limit


def _verdict(grid, G, tol):
    """First grid point where ``G`` drops below its running maximum by more than ``tol * scale``."""
    run = np.maximum.accumulate(G)
    scale = np.maximum(np.maximum.accumulate(np.abs(G)), 1e-300)
    bad = np.nonzero(G - run < -tol * scale)[0]
    if bad.size:
        return VIOLATED_AT, float(grid[bad[0]])
    return NON_DECREASING, None


def _extract(grid, G, limit):
    t = grid[1:]
    tail = np.maximum(limit - G[1:], 0.0)
    tail = np.minimum.accumulate(tail)
    keep = np.concatenate([[True], np.diff(tail) < 0]) | (tail > 0)
    t, tail = t[keep], tail[keep]
    if tail.size < 2 or tail[0] <= 0:
        return Zero()
    return Tabulated(tuple(t.tolist()), tuple(tail.tolist()), 1)


def g1_profile(xi: CharacteristicTriplet, mu: LaplaceExponent, cfg: GridConfig | None = None,
               tol: float = 1e-8) -> MonotoneProfile:
    """Profile ``G1(t) = gamma0 nu_X((0, t)) - int mu_{exp(-x)}((0, t)) nu_xi(dx)`` for ``sigma2 = 0``."""
    cfg = cfg or GridConfig(h=1e-2, t_max=30.0)
    if xi.sigma2 != 0:
        raise PreconditionViolated("G1 needs sigma2 = 0; use g2_profile")
    if xi.nu.mass_plus > 0:
        raise PreconditionViolated("xi must be spectrally negative")
    g0 = gamma0(xi)
    if not g0 > 0:
        raise PreconditionViolated(f"need gamma0 > 0, got {g0!r}")
    rep = mu.repr
    if rep is None or rep.k is None:
        raise PreconditionViolated("mu needs a known k-function (selfdecomposable representation)")
    grid = np.arange(int(math.ceil(cfg.t_max / cfg.h)) + 1) * cfg.h
    k0 = rep.k0 if rep.k0 is not None else np.inf
    kt = np.asarray(rep.k(grid[1:]), float)
    base = np.concatenate([[0.0], k0 - kt]) if np.isfinite(k0) else np.concatenate([[-kt[0]], -kt])
    G = g0 * base
    limit = g0 * k0
    if not xi.nu.is_zero:
        term, lim = _factor_term(mu, xi.nu, grid, cfg)
        G = G - term
        limit -= lim
    verdict, witness = _verdict(grid, G, tol)
    extracted = None
    if verdict == NON_DECREASING and np.isfinite(limit):
        extracted = SubordinatorSpec(g0 * rep.drift, _extract(grid, G, limit))
    return MonotoneProfile(grid, G, verdict, witness, extracted, limit,
                           meta={"variant": "G1", "gamma0": g0, "step": cfg.h, "tol": tol})


def g2_profile(xi: CharacteristicTriplet, mu: LaplaceExponent, cfg: GridConfig | None = None,
               tol: float = 1e-8, edge_tol: float = 1e-2) -> MonotoneProfile:
    """Profile ``G2`` for ``sigma2 > 0``; needs zero drift of ``mu`` and ``nu_X(R+) < inf``."""
    cfg = cfg or GridConfig(h=1e-2, t_max=100.0)
    s2 = xi.sigma2
    if not s2 > 0:
        raise PreconditionViolated("G2 needs sigma2 > 0; use g1_profile")
    if xi.nu.mass_plus > 0 or not np.isfinite(xi.nu.mass_minus):
        raise PreconditionViolated("xi must be spectrally negative with finite jump mass")
    g0 = gamma0(xi)
    if not g0 > 0:
        raise PreconditionViolated(f"need gamma0 > 0, got {g0!r}")
    rep = mu.repr
    if rep is None or rep.k is None:
        raise PreconditionViolated("mu needs a known k-function (selfdecomposable representation)")
    if rep.drift != 0:
        raise PreconditionViolated("mu must have zero drift")
    k0 = rep.k0
    if k0 is None or not np.isfinite(k0):
        raise PreconditionViolated("nu_X(R+) = k(0+) must be finite")
    h = cfg.h
    grid = np.arange(int(math.ceil(cfg.t_max / h)) + 1) * h
    if rep.driving_density is not None:
        g = np.asarray(rep.driving_density(grid), float)
    else:
        g = -np.gradient(np.asarray(rep.k(grid), float), h, edge_order=2)
    tg = grid * g
    peak = np.max(np.abs(tg))
    # t g(t) -> 0 at the origin: small, or still shrinking linearly toward it
    if abs(tg[1]) > edge_tol * peak and abs(tg[1]) > 0.5 * abs(tg[min(10, grid.size - 1)]):
        raise EdgeConditionViolated(f"t g(t) does not vanish at the origin (value {tg[1]!r})", witness=float(grid[1]))
    # at the right end of the grid it must be negligible against its peak
    if abs(tg[-1]) > edge_tol * peak:
        raise EdgeConditionViolated(f"t g(t) = {tg[-1]!r} at t = {grid[-1]!r} is not negligible",
                                    witness=float(grid[-1]))
    ig = np.concatenate([[0.0], k0 - np.asarray(rep.k(grid[1:]), float)])
    gg = np.convolve(g, g)[: grid.size] * h - 0.5 * h * (g[0] * g + g * g[0])
    igg = np.concatenate([[0.0], np.cumsum(0.5 * h * (gg[1:] + gg[:-1]))])
    G = (g0 + s2 * k0) * ig + 0.5 * s2 * tg - 0.5 * s2 * igg
    limit = g0 * k0 + 0.5 * s2 * k0**2
    if not xi.nu.is_zero:
        term, lim = _factor_term(mu, xi.nu, grid, cfg)
        G = G - term
        limit -= lim
    verdict, witness = _verdict(grid, G, tol)
    extracted = _extract(grid, G, limit) if verdict == NON_DECREASING else None
    return MonotoneProfile(grid, G, verdict, witness,
                           SubordinatorSpec(0.0, extracted) if extracted is not None else None, limit,
                           meta={"variant": "G2", "gamma0": g0, "step": h, "tol": tol})


# ---------------------------------------------------------------------------
# Range transforms


def nested_normalize(xi: CharacteristicTriplet) -> CharacteristicTriplet:
    """``(gamma, sigma2, nu) -> (gamma/sigma2, 1, nu/sigma2)``: same range, unit Gaussian part."""
    if not xi.sigma2 > 0:
        raise ZeroGaussianPart("normalisation needs sigma2 > 0")
    s = xi.sigma2
    return CharacteristicTriplet(xi.gamma / s, 1.0, xi.nu.scaled(1.0 / s))


def thin_jump_bound(xi: CharacteristicTriplet, lam: float) -> float:
    """Smallest admissible ``gamma'``: ``gamma - (1 - lam) int_[-1,0) x nu(dx)``."""
    small = xi.nu.expect(lambda x: x, -1.0, 0.0, closed_lo=True, closed_hi=False)
    return xi.gamma - (1.0 - lam) * small


def thin_jumps(xi: CharacteristicTriplet, lam: float, gamma_prime: float) -> CharacteristicTriplet:
    """``(gamma, sigma2, nu) -> (gamma', sigma2, lam nu)``, whose range contains the original."""
    if xi.nu.mass_plus > 0:
        raise PreconditionViolated("xi must be spectrally negative")
    if not 0 < lam <= 1:
        raise ValueError("lam must lie in (0, 1]")
    bound = thin_jump_bound(xi, lam)
    if gamma_prime < bound - 1e-12 * max(1.0, abs(bound)):
        raise DriftCompensationTooSmall(
            f"gamma' = {gamma_prime!r} is below the required {bound!r}", witness=bound
        )
    return CharacteristicTriplet(gamma_prime, xi.sigma2, xi.nu.scaled(lam))


# ---------------------------------------------------------------------------
# GGC laws outside the range of Brownian motion with drift


def ggc_bm_bracket(rho: StieltjesRepr, a: float, sigma2: float, t) -> np.ndarray:
    """Necessary-condition bracket for ``m(t) = int exp(-l t) rho(dl)``, scaled by ``exp(l_min t)``.

    ``(a + s int m + s/2) m + (s/2) t m' - (s/2) (m * m)``; the law is in
    the range only if this is non-negative for every ``t``.
    """
    lam = np.asarray(rho.atoms, float)
    w = np.asarray(rho.weights, float)
    t = np.asarray(t, float)
    lmin = lam.min()
    e = np.exp(-np.outer(t, lam - lmin))  # scaled exponentials
    m = e @ w
    dm = -(e @ (w * lam))
    mass = float(np.sum(w / lam))
    conv = np.zeros_like(t)
    for i in range(lam.size):
        for j in range(lam.size):
            if lam[i] == lam[j]:
                conv += w[i] * w[j] * t * e[:, i]
            else:
                conv += w[i] * w[j] * (e[:, i] - e[:, j]) / (lam[j] - lam[i])
    s = sigma2
    return (a + s * mass + 0.5 * s) * m + 0.5 * s * t * dm - 0.5 * s * conv


def ggc_bm_exclusion_witness(rho: StieltjesRepr, a: float, sigma2: float, t_max: float = 1e3,
                             n: int = 4000) -> float | None:
    """First ``t`` on a log grid up to ``t_max`` where the bracket is negative, or ``None``."""
    w = np.asarray(rho.weights, float)
    if w.size == 0 or not np.any(w > 0):
        raise PreconditionViolated("rho = 0: k vanishes identically")
    if not (a > 0 and sigma2 > 0):
        raise PreconditionViolated("need a > 0 and sigma2 > 0")
    keep = w > 0
    rho = StieltjesRepr(0.0, tuple(np.asarray(rho.atoms)[keep]), tuple(w[keep]))
    t = np.geomspace(1e-3, t_max, n)
    b = ggc_bm_bracket(rho, a, sigma2, t)
    neg = np.nonzero(b < 0)[0]
    return float(t[neg[0]]) if neg.size else None
