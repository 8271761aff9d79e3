"""Compiled inner loops for Monte Carlo simulation.

Random numbers come from a per-sample splitmix64 stream seeded by
``mix(seed * GOLD + index)``, so every sample is reproducible on its own
and the result does not depend on how samples are split across workers.
Normal variates use a 256-layer ziggurat.
"""

from __future__ import annotations

import numba as nb
import numpy as np

# splitmix64 constants
GOLD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_S11, _S12, _S8 = np.uint64(11), np.uint64(12), np.uint64(8)
_B255, _ONE = np.uint64(255), np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

# ziggurat tables for the standard normal
_R = 3.6541528853610088
_V = 0.00492867323399


def _ziggurat_tables():
    f = lambda x: np.exp(-0.5 * x * x)
    X = np.empty(257)
    X[0] = _V / f(_R)
    X[1] = _R
    for i in range(1, 255):
        X[i + 1] = np.sqrt(-2.0 * np.log(_V / X[i] + f(X[i])))
    X[256] = 0.0
    W = X[:256] / 2.0**52
    K = np.floor(X[1:257] / X[:256] * 2.0**52).astype(np.int64)
    return W, K, f(X)


ZW, ZK, ZF = _ziggurat_tables()

KIND_ATOMS, KIND_EXPONENTIAL, KIND_NORMAL_SQUARED, KIND_LOG_PARETO, KIND_TABLE = 0, 1, 2, 3, 4


@nb.njit(inline="always")
def mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(inline="always")
def uniform(s):
    """Uniform on (0, 1) and the advanced state."""
    s += GOLD
    return ((mix(s) >> _S11) + 0.5) * _INV53, s


@nb.njit(inline="always")
def normal(s, W, K, F):
    while True:
        s += GOLD
        r = mix(s)
        idx = np.int64(r & _B255)
        rabs = np.int64(r >> _S12)
        x = rabs * W[idx]
        if (r >> _S8) & _ONE:
            x = -x
        if rabs < K[idx]:
            return x, s
        if idx == 0:
            while True:
                u1, s = uniform(s)
                u2, s = uniform(s)
                xx = -np.log(u1) / _R
                yy = -np.log(u2)
                if yy + yy > xx * xx:
                    return (-(_R + xx) if x < 0 else _R + xx), s
        u, s = uniform(s)
        y = F[idx] + u * (F[idx + 1] - F[idx])
        if y < np.exp(-0.5 * x * x):
            return x, s


@nb.njit(cache=True)
def sample_normals(n, seed, W, K, F):
    """``n`` standard normals from one stream (used to test the generator)."""
    out = np.empty(n)
    s = mix(np.uint64(seed) * GOLD)
    for i in range(n):
        out[i], s = normal(s, W, K, F)
    return out


@nb.njit(inline="always")
def _exp_time(rate, s):
    if rate <= 0.0:
        return np.inf, s
    u, s = uniform(s)
    return -np.log(u) / rate, s


@nb.njit(cache=True)
def _jump(s, cum_rate, kinds, par, sign, phi, off, ln, xs, cs, W, K, F):
    """Draw one jump from the superposition of components."""
    u, s = uniform(s)
    total = cum_rate[cum_rate.size - 1]
    k = 0
    while k < cum_rate.size - 1 and u * total >= cum_rate[k]:
        k += 1
    kind = kinds[k]
    v, s = uniform(s)
    if kind == KIND_ATOMS or kind == KIND_TABLE:
        lo = off[k]
        hi = lo + ln[k] - 1
        if kind == KIND_ATOMS:
            j = lo
            while j < hi and v > cs[j]:
                j += 1
            x = xs[j]
        else:
            # inverse of a piecewise linear CDF
            a, b = lo, hi
            while b - a > 1:
                mid = (a + b) // 2
                if cs[mid] <= v:
                    a = mid
                else:
                    b = mid
            w = cs[b] - cs[a]
            x = xs[a] + (xs[b] - xs[a]) * ((v - cs[a]) / w if w > 0 else 0.0)
            x = sign[k] * x
    elif kind == KIND_EXPONENTIAL:
        x = sign[k] * (-np.log(v) / par[k])
    elif kind == KIND_NORMAL_SQUARED:
        z, s = normal(s, W, K, F)
        x = sign[k] * par[k] * z * z
    else:  # log-Pareto magnitude
        x = sign[k] * np.expm1(v ** (-1.0 / par[k]) - 1.0)
    if phi[k] > 0.0:
        x = -np.log1p(phi[k] * x)
    return x, s


@nb.njit(nogil=True, cache=True)
def simulate_block(start, n, seed, g0, sigma, a_eta, h, log_delta, horizon, max_events,
                   xr, xk, xp, xsg, xphi, xoff, xln, xx, xc,
                   er, ek, ep, esg, ephi, eoff, eln, ex, ec, W, K, F):
    """Simulate ``n`` samples with indices ``start ... start+n-1``.

    Returns the functional truncated at the stopping time, ``exp(-xi)`` there,
    and a flag per sample that is 1 when the event budget ran out.
    """
    V = np.empty(n)
    tailf = np.empty(n)
    flag = np.zeros(n, dtype=np.int64)
    lam_x = xr[xr.size - 1] if xr.size else 0.0
    lam_e = er[er.size - 1] if er.size else 0.0
    sq = sigma * np.sqrt(h)
    for i in range(n):
        s = mix(np.uint64(seed) * GOLD + np.uint64(start + i))
        xi = 0.0
        t = 0.0
        v = 0.0
        tx, s = _exp_time(lam_x, s)
        te, s = _exp_time(lam_e, s)
        events = 0
        while True:
            if xi >= -log_delta or t >= horizon:
                break
            events += 1
            if events > max_events:
                flag[i] = 1
                break
            tn = min(tx, te, horizon)
            if sigma > 0.0:
                # run of full Brownian steps before the next event
                e0 = np.exp(-xi)
                while t + h < tn and xi < -log_delta and events <= max_events:
                    z, s = normal(s, W, K, F)
                    xi += g0 * h + sq * z
                    e1 = np.exp(-xi)
                    v += a_eta * 0.5 * h * (e0 + e1)
                    e0 = e1
                    t += h
                    events += 1
                if xi >= -log_delta or events > max_events:
                    continue
            if not np.isfinite(tn):
                # deterministic remainder: xi grows linearly with no more events
                if g0 > 0.0:
                    v += a_eta * np.exp(-xi) / g0
                    xi = np.inf
                else:
                    flag[i] = 1
                break
            dt = tn - t
            e0 = np.exp(-xi)
            if sigma > 0.0:
                z, s = normal(s, W, K, F)
                xi += g0 * dt + sigma * np.sqrt(dt) * z
                v += a_eta * 0.5 * dt * (e0 + np.exp(-xi))
            else:
                if g0 != 0.0:
                    v += a_eta * e0 * (-np.expm1(-g0 * dt)) / g0
                else:
                    v += a_eta * e0 * dt
                xi += g0 * dt
            t = tn
            if t == te:
                jmp, s = _jump(s, er, ek, ep, esg, ephi, eoff, eln, ex, ec, W, K, F)
                v += np.exp(-xi) * jmp
                d, s = _exp_time(lam_e, s)
                te = t + d
            if t == tx:
                jmp, s = _jump(s, xr, xk, xp, xsg, xphi, xoff, xln, xx, xc, W, K, F)
                xi += jmp
                d, s = _exp_time(lam_x, s)
                tx = t + d
        V[i] = v
        tailf[i] = np.exp(-xi)
    return V, tailf, flag


@nb.njit(nogil=True, cache=True)
def simulate_poisson_block(start, n, seed, log_c, p_xi, v_rate, log_delta):
    """``V = sum_j c**(-N(tau_j-))`` over the jump times of a rate-``v`` Poisson process.

    Events of the merged process are jumps of ``xi`` with probability ``p_xi``.
    """
    V = np.empty(n)
    tailf = np.empty(n)
    for i in range(n):
        s = mix(np.uint64(seed) * GOLD + np.uint64(start + i))
        v = 0.0
        nx = 0.0
        if v_rate > 0.0:
            while nx * log_c < -log_delta:
                u, s = uniform(s)
                if u < p_xi:
                    nx += 1.0
                else:
                    v += np.exp(-nx * log_c)
        V[i] = v
        tailf[i] = np.exp(-nx * log_c) if v_rate > 0.0 else 0.0
    return V, tailf
