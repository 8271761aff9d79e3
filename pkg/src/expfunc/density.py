"""Densities of exponential functionals from their Volterra equations.

Cases with a single-signed jump structure and no Gaussian part reduce to a
homogeneous linear Volterra equation of the third kind.  The solvers march
away from the singular edge of the support on a uniform grid, using the
local power law ``f ~ (distance to edge)**(p - 1)`` to start, and then fix
the scale by normalisation.  The general case is exposed through a residual
operator that certifies a candidate density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .bernstein import geometric_grid, is_completely_monotone
from .errors import (
    EdgeConditionViolated,
    NotCM,
    NotStationary,
    PreconditionViolated,
    SingularAtLeftEdge,
    TruncationBudgetExceeded,
    UnsupportedProcess,
)
from .grids import GridCDF, GridDensity, ResidualReport
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
class GridConfig:
    """Grid parameters shared by the solvers.

    ``t_max`` forces the grid to extend at least that far; the case (i)
    solver keeps extending until the extrapolated tail mass falls below
    ``tail_tol`` relative to the total, or ``max_points`` is reached.
    """

    h: float = 1e-3
    t_max: float | None = None
    tail_tol: float = 1e-6
    max_points: int = 400_000
    refinements: int = 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step must be positive")

    def refined(self) -> "GridConfig":
        return GridConfig(self.h / 2, self.t_max, self.tail_tol, 2 * self.max_points, self.refinements)


# ---------------------------------------------------------------------------
# Marching engine


@dataclass
class _Atom:
    weight: float
    sigma: Callable[[float], float]  # lower integration limit in y as a function of y


def _power_weights(p: float, m: int) -> np.ndarray:
    """Node weights (in units of ``h * g_1``) of ``int_0^{m h} K(y) (y/h)**(p-1) dy``
    with ``K`` linear between nodes."""
    j = np.arange(m, dtype=float)
    i0 = ((j + 1) ** p - j**p) / p
    i1 = ((j + 1) ** (p + 1) - j ** (p + 1)) / (p + 1)
    w = np.zeros(m + 1)
    w[:-1] += (j + 1) * i0 - i1
    w[1:] += i1 - j * i0
    return w


class _March:
    """Solve ``g0 * y * g(y) = sum_k w_k int_{sigma_k(y)}^y g + int_0^y K(y, y') g(y') dy'``.

    ``toeplitz(d)`` gives the part of ``K`` that depends on ``y - y'`` only and
    ``general(y, ys)`` the rest.  The kernel at coincident points sums to
    ``p * g0`` so that ``g ~ y**(p-1)`` near ``y = 0``.
    """

    def __init__(self, h, g0, p, atoms, toeplitz=None, general=None):
        self.h, self.g0, self.p = float(h), float(g0), float(p)
        self.atoms = atoms
        self.toeplitz = toeplitz
        self.general = general
        self.m = max(1, int(math.ceil(p / 2.0)))
        self.pw = _power_weights(self.p, self.m)

    def run(self, n_min: int, n_max: int, stop: Callable | None = None, check_every: int = 256):
        h, p, m = self.h, self.p, self.m
        size = max(n_min, 16) + 1
        g = np.zeros(size)
        C = np.zeros(size)
        kt = None
        j = np.arange(1, m + 1, dtype=float)
        g[1 : m + 1] = j ** (p - 1.0)
        C[1 : m + 1] = h * j**p / p
        i = m
        while True:
            i += 1
            if i >= size:
                if size > n_max:
                    raise TruncationBudgetExceeded(f"grid budget of {n_max} points exhausted")
                new = min(2 * size, n_max + 2)
                g = np.concatenate([g, np.zeros(new - size)])
                C = np.concatenate([C, np.zeros(new - size)])
                size = new
                kt = None
            if self.toeplitz is not None and kt is None:
                kt = np.asarray(self.toeplitz(np.arange(size) * h), float)
            y = i * h
            alpha, beta = 0.0, 0.0
            c_known = C[i - 1] + 0.5 * h * g[i - 1]
            for at in self.atoms:
                s = at.sigma(y)
                a_s, b_s = self._cum_at(s, i, g, C)
                alpha += at.weight * (c_known - a_s)
                beta += at.weight * (0.5 * h - b_s)
            if kt is not None or self.general is not None:
                K = np.zeros(i + 1)
                if kt is not None:
                    K += kt[i::-1]
                if self.general is not None:
                    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                        K += np.nan_to_num(self.general(y, np.arange(i + 1) * h), nan=0.0, posinf=0.0)
                alpha += g[1] * h * float(self.pw @ K[: m + 1])
                if i - 1 > m:
                    alpha += h * float(K[m + 1 : i] @ g[m + 1 : i])
                alpha += 0.5 * h * K[m] * g[m]
                beta += 0.5 * h * K[i]
            den = self.g0 * y - beta
            if not den > 1e-3 * self.g0 * y:
                raise SingularAtLeftEdge(f"step at y={y!r} is ill-conditioned")
            g[i] = alpha / den
            if not np.isfinite(g[i]) or g[i] < 0:
                raise SingularAtLeftEdge(f"non-finite value at y={y!r}")
            C[i] = c_known + 0.5 * h * g[i]
            if i >= n_max or (stop is not None and i >= n_min and i % check_every == 0 and stop(i, g, C)):
                return g[: i + 1], C[: i + 1]

    def _cum_at(self, s, i, g, C):
        """``int_0^s g`` as ``known + coef * g[i]`` with ``g`` piecewise linear."""
        h, m = self.h, self.m
        if s <= 0:
            return 0.0, 0.0
        y = i * h
        if s >= y:
            return C[i - 1] + 0.5 * h * g[i - 1], 0.5 * h
        if s <= m * h:
            return h * (s / h) ** self.p / self.p, 0.0
        j = int(s / h)
        if j >= i:
            j = i - 1
        tau = s - j * h
        if j <= i - 2:
            return C[j] + g[j] * tau + (g[j + 1] - g[j]) * tau * tau / (2 * h), 0.0
        return C[j] + g[j] * tau - g[j] * tau * tau / (2 * h), tau * tau / (2 * h)


def _tail_estimate(t, g, i):
    """Extrapolated mass beyond ``t[i]`` and the model used (exponential or power)."""
    i1, i2, i3 = i // 2, (3 * i) // 4, i
    g1, g2, g3 = g[i1], g[i2], g[i3]
    if g3 == 0.0:
        return 0.0, "none"
    if min(g1, g2) <= 0 or not (g1 > g2 > g3):
        return np.inf, "none"
    t1, t2, t3 = t[i1], t[i2], t[i3]
    r1 = math.log(g1 / g2) / (t2 - t1)
    r2 = math.log(g2 / g3) / (t3 - t2)
    a1 = math.log(g1 / g2) / math.log(t2 / t1)
    a2 = math.log(g2 / g3) / math.log(t3 / t2)
    drift_exp = abs(r1 - r2) / r2
    drift_pow = abs(a1 - a2) / a2
    if drift_exp <= drift_pow:
        return g3 / r2, "exponential"
    if a2 <= 1.0:
        return np.inf, "power"
    return g3 * t3 / (a2 - 1.0), "power"


def _check_one_sided(xi: CharacteristicTriplet, eta: SubordinatorSpec, case: str):
    if xi.sigma2 != 0:
        raise PreconditionViolated("the marching solvers need sigma2 = 0; use residual_case_iii")
    g0 = gamma0(xi)
    if not g0 > 0:
        raise PreconditionViolated(f"need gamma0 > 0, got {g0!r}")
    if case == "i":
        if xi.nu.mass_plus > 0:
            raise PreconditionViolated("case (i) needs a spectrally negative xi")
        if xi.nu.is_zero and eta.nu.is_zero:
            raise PreconditionViolated("both processes are deterministic: the functional is a point mass")
    else:
        if xi.nu.mass_minus > 0 or not xi.nu.mass_plus > 0:
            raise PreconditionViolated("case (ii) needs positive and no negative jumps of xi")
        if not eta.nu.is_zero:
            raise PreconditionViolated("case (ii) needs eta to be a pure drift")
        if not eta.drift > 0:
            raise PreconditionViolated("case (ii) needs a positive drift of eta")
    verdict = convergence_check(xi, eta)
    if verdict is not Convergence.CONVERGES:
        raise PreconditionViolated(f"exponential functional not known to converge ({verdict.value})")
    return g0


def _finite_mass(x, what):
    if not np.isfinite(x):
        raise UnsupportedProcess(f"{what} has infinite mass; the marching solvers need finite activity")
    return float(x)


def _with_refinement(solve, cfg: GridConfig):
    last = None
    for _ in range(cfg.refinements + 1):
        try:
            return solve(cfg)
        except SingularAtLeftEdge as exc:
            last = exc
            cfg = cfg.refined()
    raise SingularAtLeftEdge(f"{last} (after {cfg.refinements} refinements)")


def solve_case_i(xi: CharacteristicTriplet, eta: SubordinatorSpec, cfg: GridConfig | None = None) -> GridDensity:
    """Density when ``xi`` has no Gaussian part and no positive jumps.

    The support is ``[a/gamma0, inf)`` where ``a`` is the drift of ``eta``.
    """
    cfg = cfg or GridConfig()
    g0 = _check_one_sided(xi, eta, "i")
    a = eta.drift
    t0 = a / g0
    k_xi = _finite_mass(xi.nu.mass_minus, "nu_xi")
    k_eta = _finite_mass(eta.nu.mass_plus, "nu_eta")
    p = (k_xi + k_eta) / g0

    def solve(cfg):
        atoms = []
        for x, w in zip(*xi.nu.atoms()):
            if x < 0 and w > 0:
                atoms.append(_Atom(float(w), lambda y, e=math.exp(x): (t0 + y) * e - t0))
        for d, w in zip(*eta.nu.atoms()):
            if d > 0 and w > 0:
                atoms.append(_Atom(float(w), lambda y, d=d: y - d))
        toeplitz = eta.nu.cont_tail_plus if eta.nu.has_continuous_part else None
        general = None
        if xi.nu.has_continuous_part:
            def general(y, ys):
                return xi.nu.cont_tail_minus(np.log((t0 + y) / (t0 + ys)))
        march = _March(cfg.h, g0, p, atoms, toeplitz, general)
        n_min = int(math.ceil((cfg.t_max - t0) / cfg.h)) if cfg.t_max is not None else 64
        n_max = max(n_min, cfg.max_points)
        state = {}

        def stop(i, g, C):
            tail, model = _tail_estimate(t0 + np.arange(i + 1) * cfg.h, g, i)
            state.update(tail=tail, model=model)
            return tail < cfg.tail_tol * C[i]

        g, C = march.run(n_min, n_max, stop, check_every=max(256, n_min // 64))
        stop(len(g) - 1, g, C)
        tail = state["tail"] if np.isfinite(state["tail"]) else 0.0
        return g, C, tail, state.get("model", "none"), cfg

    g, C, tail, model, used = _with_refinement(solve, cfg)
    total = C[-1] + tail
    vals = g / total
    vals[0] = 0.0 if p > 1 else (vals[1] if p == 1 else np.inf)
    grid = t0 + np.arange(g.size) * used.h
    return GridDensity(
        grid, vals, support=(t0, np.inf), normalized=True, edge="left", edge_exponent=p,
        tail_mass=float(tail / total),
        meta={"case": "i", "step": used.h, "edge_exponent": p, "tail_model": model},
    )


def solve_case_ii(xi: CharacteristicTriplet, eta: SubordinatorSpec, cfg: GridConfig | None = None) -> GridDensity:
    """Density when ``xi`` has only positive jumps and ``eta`` is a pure drift.

    The support is ``[0, a/gamma0]``; the march runs downwards from the right edge.
    """
    cfg = cfg or GridConfig()
    g0 = _check_one_sided(xi, eta, "ii")
    T = eta.drift / g0
    p = _finite_mass(xi.nu.mass_plus, "nu_xi") / g0

    def solve(cfg):
        n = max(int(math.ceil(T / cfg.h)), 8)
        h = T / n
        atoms = [
            _Atom(float(w), lambda y, e=math.exp(x): T - (T - y) * e)
            for x, w in zip(*xi.nu.atoms())
            if x > 0 and w > 0
        ]
        general = None
        if xi.nu.has_continuous_part:
            def general(y, ys):
                return xi.nu.cont_tail_plus(np.log((T - ys) / (T - y)))
        march = _March(h, g0, p, atoms, None, general)
        g, C = march.run(n, n)
        return g, C, GridConfig(h, cfg.t_max, cfg.tail_tol, cfg.max_points, cfg.refinements)

    g, C, used = _with_refinement(solve, cfg)
    vals = g / C[-1]
    vals[0] = 0.0 if p > 1 else (vals[1] if p == 1 else np.inf)
    grid = np.linspace(0.0, T, g.size)
    return GridDensity(
        grid, vals[::-1].copy(), support=(0.0, T), normalized=True, edge="right", edge_exponent=p,
        meta={"case": "ii", "step": used.h, "edge_exponent": p},
    )


def solve_cogarch(spec: COGARCHSpec, cfg: GridConfig | None = None) -> GridDensity:
    """Stationary COGARCH volatility density via its GOU representation."""
    if spec.nu_S.is_zero:
        raise PreconditionViolated("nu_S = 0: the volatility is deterministic")
    xi, eta = cogarch_to_gou(spec)
    cfg = cfg or GridConfig(h=1e-2, t_max=spec.beta / spec.eta * 200)
    out = solve_case_i(xi, eta, cfg)
    out.meta["case"] = "cogarch"
    return out


# ---------------------------------------------------------------------------
# Residual operators


def _cum_eval(f: GridDensity, x):
    """``int_{grid[0]}^x f`` for the piecewise linear interpolant (power cell at a known edge)."""
    x = np.atleast_1d(np.asarray(x, float))
    t, h = f.grid, f.h
    vals = np.where(np.isfinite(f.values), f.values, 0.0)
    C = f.cumulative()
    n = t.size
    s = np.clip((x - t[0]) / h, 0.0, n - 1.0)
    j = np.minimum(s.astype(int), n - 2)
    tau = (s - j) * h
    out = C[j] + vals[j] * tau + (vals[j + 1] - vals[j]) * tau**2 / (2 * h)
    p = f.edge_exponent
    if p is not None and f.edge == "left":
        first = j == 0
        out[first] = C[1] * (tau[first] / h) ** p
    elif p is not None and f.edge == "right":
        last = j == n - 2
        out[last] = C[-2] + (C[-1] - C[-2]) * (1.0 - (1.0 - tau[last] / h) ** p)
    return out


def _eval_indices(n: int, limit: int) -> np.ndarray:
    stride = max(1, int(math.ceil(n / limit)))
    return np.arange(1, n - 1, stride)


def _conv_tail(vals: np.ndarray, kern: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid value of ``int_{t_0}^{t_i} K(t_i - s) f(s) ds`` for every node."""
    n = vals.size
    full = np.convolve(kern[:n], vals)[:n] * h
    return full - 0.5 * h * (kern[np.arange(n)] * vals[0] + kern[0] * vals)


def _residual(f: GridDensity, a: float, g0: float, sigma2: float, xi_nu, eta_nu, derivative=None,
              eta_kernel: np.ndarray | None = None, limit: int = 4000, variant: str = "iii") -> ResidualReport:
    t, h = f.grid, f.h
    vals = np.where(np.isfinite(f.values), f.values, 0.0)
    e = _eval_indices(t.size, limit if (xi_nu.has_continuous_part) else t.size)
    te, fe = t[e], vals[e]
    res = a * fe - (g0 + 0.5 * sigma2) * te * fe
    if sigma2 > 0:
        df = np.gradient(vals, h, edge_order=2) if derivative is None else np.asarray(derivative, float)
        res -= 0.5 * sigma2 * te**2 * df[e]
    F_te = _cum_eval(f, te)
    for x, w in zip(*xi_nu.atoms()):
        if x > 0:
            res -= w * (_cum_eval(f, te * math.exp(x)) - F_te)
        elif x < 0:
            res += w * (F_te - _cum_eval(f, te * math.exp(x)))
    if eta_nu is not None:
        for d, w in zip(*eta_nu.atoms()):
            res += w * (F_te - _cum_eval(f, te - d))
    if xi_nu.has_continuous_part:
        wts = np.full(t.size, h)
        for r, (k, tk) in enumerate(zip(e, te)):
            with np.errstate(divide="ignore", invalid="ignore"):
                up = np.nan_to_num(xi_nu.cont_tail_plus(np.log(t[k:] / tk)), nan=0.0)
                down = np.nan_to_num(xi_nu.cont_tail_minus(np.log(tk / t[: k + 1])), nan=0.0, posinf=0.0)
            wu = wts[k:].copy()
            wu[0] = wu[-1] = h / 2
            wd = wts[: k + 1].copy()
            wd[0] = wd[-1] = h / 2
            res[r] += -float(np.sum(wu * up * vals[k:])) + float(np.sum(wd * down * vals[: k + 1]))
    if eta_kernel is None and eta_nu is not None and eta_nu.has_continuous_part:
        eta_kernel = np.asarray(eta_nu.cont_tail_plus(np.arange(t.size) * h), float)
    if eta_kernel is not None:
        res += _conv_tail(vals, eta_kernel, h)[e]
    return ResidualReport(te, res, variant, scale=float(np.max(vals)))


def _edge_condition(f: GridDensity):
    t = f.grid
    vals = np.where(np.isfinite(f.values), f.values, np.inf)
    pos = np.nonzero(t > 0)[0]
    if pos.size < 3:
        return
    v = t[pos] ** 2 * vals[pos]
    k = min(16, pos.size - 1)
    scale = np.max(v[np.isfinite(v)]) if np.any(np.isfinite(v)) else np.inf
    if not np.isfinite(v[0]) or (v[0] > 1e-8 * scale and v[0] >= 0.5 * v[k]):
        raise EdgeConditionViolated(
            f"t^2 f(t) does not vanish at the origin (value {v[0]!r} at t={t[pos[0]]!r})", witness=float(t[pos[0]])
        )


def residual_case_iii(xi: CharacteristicTriplet, eta: SubordinatorSpec, f: GridDensity, derivative=None,
                      limit: int = 4000) -> ResidualReport:
    """Residual of the general integro-differential equation for a candidate density ``f``.

    ``derivative`` overrides the central-difference ``f'`` on the same grid.
    Points are subsampled to at most ``limit`` when ``xi`` has a continuous
    jump part (each point then costs a full quadrature).
    """
    if xi.sigma2 > 0:
        _edge_condition(f)
    return _residual(f, eta.drift, gamma0(xi), xi.sigma2, xi.nu, eta.nu, derivative, limit=limit)


def sd_density_residual(f: GridDensity, a: float, nu) -> ResidualReport:
    """Residual of ``(a - t) f(t) + int_a^t nu((t - s, inf)) f(s) ds``."""
    from .levy import Zero

    return _residual(f, a, 1.0, 0.0, Zero(), nu, variant="sd")


def _origin_mass(m: Callable, h: float) -> float:
    """``int_0^h m`` in the variable ``log x``; rejects ``m`` that is not integrable at 0."""
    g = lambda s: float(m(np.array([math.exp(s)]))[0]) * math.exp(s)
    near = integrate.quad(g, math.log(1e-300), math.log(1e-150), limit=200)[0]
    rest = integrate.quad(g, math.log(1e-150), math.log(h), limit=200)[0]
    if not (np.isfinite(near) and np.isfinite(rest)) or near > 1e-8 * max(rest, 1e-300):
        raise UnsupportedProcess("m is not integrable at the origin")
    return near + rest


def ggc_density_residual(f: GridDensity, a: float, m: Callable, grid=None) -> ResidualReport:
    """Residual of the selfdecomposable equation with tail ``int_x^inf m``, ``m`` completely monotone."""
    from .levy import Zero

    verdict = is_completely_monotone(m, grid if grid is not None else geometric_grid())
    if not verdict.passed:
        raise NotCM(f"m is not completely monotone ({verdict.detail})", witness=verdict.witness)
    h, n = f.h, f.grid.size
    x = np.arange(n) * h
    # tail integral by 5-point Gauss-Legendre per cell, accumulated from the right
    nodes, weights = np.polynomial.legendre.leggauss(5)
    mid = x[:-1] + h / 2
    pts = mid[:, None] + (h / 2) * nodes[None, :]
    cell = (h / 2) * (np.asarray(m(pts.ravel()), float).reshape(pts.shape) @ weights)
    cell[0] = _origin_mass(m, h)
    far = integrate.quad(m, x[-1], np.inf, limit=200)[0]
    kern = np.concatenate([np.cumsum(cell[::-1])[::-1], [0.0]]) + far
    return _residual(f, a, 1.0, 0.0, Zero(), None, eta_kernel=kern, variant="ggc")


# ---------------------------------------------------------------------------
# COGARCH with Poisson jumps: delay ODE for the distribution function


def cogarch_poisson_cdf(beta: float, eta: float, c: float, cfg: GridConfig | None = None,
                        phi: float = 1.0, t_max: float | None = None) -> GridCDF:
    """Stationary COGARCH volatility CDF for ``nu_S = c * delta_1``.

    The CDF solves ``(eta t - beta) F'(t) = c (F(t) - F(t / (1 + phi)))`` with
    ``F = 0`` below ``t0 = beta/eta``.  On ``[t0, (1+phi) t0]`` the delayed term
    vanishes and ``F = A (t - t0)**(c/eta)`` exactly.  Beyond, the equation is
    integrated by classical RK4 in ``x = log t`` (the delay is then the
    constant ``log(1+phi)``) with cubic Hermite history.  ``A`` is fixed by
    the limit of ``F`` at infinity, extrapolated with Aitken's process along
    the geometric sequence of delay points.
    """
    cfg = cfg or GridConfig(h=1e-3)
    if not (beta > 0 and eta > 0 and c > 0 and phi > 0):
        raise ValueError("beta, eta, c and phi must be positive")
    d = math.log1p(phi)
    if not c * d < eta:
        raise NotStationary(f"c log(1+phi) = {c * d!r} is not below eta = {eta!r}", witness=c * d)
    t0 = beta / eta
    p = c / eta
    x1 = math.log(t0) + d
    M = max(4, int(round(d / cfg.h)))
    dx = d / M

    def F1(x):
        return np.maximum(np.exp(x) - t0, 0.0) ** p

    def rhs(x, F, Fdel):
        t = math.exp(x)
        return c * t / (eta * t - beta) * (F - Fdel)

    xs = [x1]
    Fs = [float(F1(x1))]
    dFs = [rhs(x1, Fs[0], 0.0)]

    def delayed(xq):
        """F at ``xq - d`` from history (closed form in the first region)."""
        xd = xq - d
        if xd <= x1 + 1e-14:
            return float(F1(xd)) if xd > math.log(t0) else 0.0
        k = (xd - x1) / dx
        j = min(int(k), len(xs) - 2)
        s = k - j
        f0, f1, m0, m1 = Fs[j], Fs[j + 1], dFs[j] * dx, dFs[j + 1] * dx
        s2, s3 = s * s, s * s * s
        return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * m1

    limits = []
    n_delays = 0
    F_inf = None
    while n_delays < 400:
        for _ in range(M):
            x, F = xs[-1], Fs[-1]
            k1 = rhs(x, F, delayed(x))
            dm = delayed(x + dx / 2)
            k2 = rhs(x + dx / 2, F + dx / 2 * k1, dm)
            k3 = rhs(x + dx / 2, F + dx / 2 * k2, dm)
            k4 = rhs(x + dx, F + dx * k3, delayed(x + dx))
            Fn = F + dx / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            xs.append(x + dx)
            Fs.append(Fn)
            dFs.append(rhs(x + dx, Fn, delayed(x + dx)))
        n_delays += 1
        limits.append(Fs[-1])
        if len(limits) >= 3:
            a0, a1, a2 = limits[-3:]
            den = (a2 - a1) - (a1 - a0)
            est = a2 - (a2 - a1) ** 2 / den if den != 0 else a2
            if F_inf is not None and abs(est - F_inf) < 1e-12 * abs(est) and (t_max is None or math.exp(xs[-1]) >= t_max):
                F_inf = est
                break
            F_inf = est
    xs_a, Fs_a, dFs_a = np.array(xs), np.array(Fs) / F_inf, np.array(dFs) / F_inf
    A = 1.0 / F_inf

    def evaluate(t):
        t = np.asarray(t, float)
        out = np.zeros_like(t)
        inner = (t > t0) & (t <= math.exp(x1))
        out[inner] = A * (t[inner] - t0) ** p
        outer = t > math.exp(x1)
        if np.any(outer):
            xq = np.log(t[outer])
            k = (xq - x1) / dx
            j = np.clip(k.astype(int), 0, xs_a.size - 2)
            s = k - j
            beyond = j >= xs_a.size - 2
            s2, s3 = s * s, s * s * s
            v = ((2 * s3 - 3 * s2 + 1) * Fs_a[j] + (s3 - 2 * s2 + s) * dFs_a[j] * dx
                 + (-2 * s3 + 3 * s2) * Fs_a[j + 1] + (s3 - s2) * dFs_a[j + 1] * dx)
            v[beyond & (k > xs_a.size - 1)] = np.nan
            out[outer] = v
        return out

    hi = t_max if t_max is not None else t0 * 50
    grid = np.arange(t0, hi + cfg.h / 2, cfg.h)
    vals = evaluate(grid)
    local = local_edge_exponent(evaluate, t0)
    return GridCDF(
        grid, np.clip(vals, 0.0, 1.0),
        meta={"edge_exponent": p, "measured_edge_exponent": local, "steps_per_delay": M,
              "solved_to": float(math.exp(xs[-1])), "scale": A},
        evaluator=evaluate,
    )


def local_edge_exponent(F: Callable, edge: float, eps: float = 1e-6) -> float:
    """Log-log slope of ``F`` at distance ``eps`` from ``edge``."""
    a, b = F(np.array([edge + eps])), F(np.array([edge + 2 * eps]))
    return float(math.log(b[0] / a[0]) / math.log(2.0))


def cdf_density(cdf: GridCDF) -> np.ndarray:
    """Central-difference density of a grid CDF."""
    return np.gradient(cdf.values, cdf.grid[1] - cdf.grid[0], edge_order=2)


# ---------------------------------------------------------------------------
# Poisson-Poisson fixed point


def poisson_selfsim_iterate(c: float, q: float, T: float, cfg: GridConfig | None = None,
                            max_iters: int = 10_000, tol: float = 1e-6) -> GridCDF:
    """Iterate ``F <- (1-q) F(c t) + q F(t - 1)`` on ``[0, T]`` with ``F = 1`` beyond ``T``.

    The start is the unit step at the mean ``q / ((1-q)(1-1/c))``.  The
    returned meta holds the achieved sup change, the iteration count, the
    convergence flag and a Markov bound ``mean / T`` on the mass cut off.
    """
    cfg = cfg or GridConfig(h=1e-3)
    if not (c > 1 and 0 < q < 1 and T > 0):
        raise ValueError("need c > 1, 0 < q < 1, T > 0")
    n = int(math.ceil(T / cfg.h))
    h = T / n
    t = np.linspace(0.0, T, n + 1)
    mean = q / ((1 - q) * (1 - 1 / c))
    F = (t >= mean).astype(float)
    F[0] = 0.0
    ct = c * t
    shift = t - 1.0
    step = poisson_selfsim_map(c, q, t)
    change, it = np.inf, 0
    while it < max_iters:
        G = step(F)
        change = float(np.max(np.abs(G - F)))
        F = G
        it += 1
        if change < tol:
            break
    converged = change < tol
    return GridCDF(t, F, meta={"iterations": it, "sup_change": change, "converged": bool(converged),
                               "mean": mean, "truncation_bound": min(1.0, mean / T), "step": h})


def poisson_selfsim_map(c: float, q: float, t: np.ndarray) -> Callable:
    """The fixed-point map on a uniform grid starting at 0 (``F = 1`` past the end)."""
    T = float(t[-1])

    def step(F):
        Fc = np.interp(c * t, t, F, right=1.0)
        Fc[c * t > T] = 1.0
        Fs = np.interp(t - 1.0, t, F, left=0.0)
        Fs[t - 1.0 <= 0] = 0.0
        G = (1 - q) * Fc + q * Fs
        G[0] = 0.0
        return G

    return step
