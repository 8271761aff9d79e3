import math

import numpy as np
import pytest

from expfunc.bernstein import BernsteinRepr, LaplaceExponent, StieltjesRepr, bo_to_ggc
from expfunc.density import GridConfig
from expfunc.errors import (
    DriftCompensationTooSmall,
    EdgeConditionViolated,
    FactorNotCompoundPoisson,
    PreconditionViolated,
    ZeroGaussianPart,
)
from expfunc.families import degenerate_law, gamma_law, inverse_gamma_law, pareto_ggc_law
from expfunc.funcmap import range_membership
from expfunc.jumps import PointMasses
from expfunc.levy import CharacteristicTriplet, CompoundPoisson, ExponentialTail, SubordinatorSpec
from expfunc.montecarlo import SimConfig, ks_distance, simulate_functional
from expfunc.ranges import (
    NON_DECREASING,
    VIOLATED_AT,
    c_factor_cdf,
    g1_profile,
    g2_profile,
    ggc_bm_bracket,
    ggc_bm_exclusion_witness,
    nested_normalize,
    thin_jump_bound,
    thin_jumps,
)

DOWN1 = CompoundPoisson(1.0, PointMasses((-1.0,), (1.0,)))


def _cubic_law():
    """Zero-drift law with ``k(t) = 1 / (2 (1 + t)**2)``, so ``g(t) = 1 / (1 + t)**3``."""
    k = lambda t: 0.5 / (1 + np.asarray(t, float)) ** 2
    g = lambda t: 1.0 / (1 + np.asarray(t, float)) ** 3
    rep = BernsteinRepr(drift=0.0, k=k, k0=0.5, driving_density=g)
    return LaplaceExponent(lambda u: np.zeros_like(np.asarray(u, float)), name="cubic", repr=rep)


def test_c_factor_cdf_matches_simulation():
    # Gamma(1, 1) = law of int exp(-t) dX_t with X compound Poisson; the c = 2 factor is
    # the law of int_0^{log 2} exp(-t) dX_t scaled by c
    F = c_factor_cdf(gamma_law(1.0, 1.0), 2.0)
    assert F.meta["atom"] == pytest.approx(0.5)
    eta = SubordinatorSpec(0.0, ExponentialTail(1.0, 1.0))
    emp = simulate_functional(CharacteristicTriplet(1.0), eta, SimConfig(n_samples=40_000, seed=8, horizon=math.log(2)))
    emp.values[:] = 2.0 * emp.values
    assert ks_distance(emp, F) < 0.01


def test_c_factor_cdf_checks():
    with pytest.raises(ValueError):
        c_factor_cdf(gamma_law(1.0, 1.0), 0.5)
    with np.errstate(divide="ignore"):
        stable = LaplaceExponent(lambda u: np.sqrt(np.asarray(u, float)), name="half-stable",
                                 repr=BernsteinRepr(k=lambda t: 1.0 / np.sqrt(np.asarray(t, float))))
        with pytest.raises(FactorNotCompoundPoisson):
            c_factor_cdf(stable, 2.0)
    with pytest.raises(PreconditionViolated):
        c_factor_cdf(inverse_gamma_law(1.0, 1.0), 2.0)
    deg = c_factor_cdf(degenerate_law(1.0), 3.0)
    assert deg(np.array([1.9, 2.0]))[1] == 1.0 and deg(np.array([1.9]))[0] == 0.0


def test_g1_gamma_with_negative_jumps_is_violated():
    prof = g1_profile(CharacteristicTriplet(1.0, 0.0, DOWN1), gamma_law(1.0, 1.0))
    assert prof.verdict == VIOLATED_AT and prof.witness == pytest.approx(3.42, abs=0.05)
    assert prof.extracted is None


def test_g1_without_jumps_extracts_the_driving_measure():
    prof = g1_profile(CharacteristicTriplet(2.0), gamma_law(2.0, 1.5))
    assert prof.verdict == NON_DECREASING
    t = np.array([0.1, 1.0, 3.0])
    assert np.allclose(prof.extracted.nu.tail_plus(t), 2.0 * 2.0 * np.exp(-1.5 * t), atol=1e-3)


def test_g1_degenerate_law_violated_at_e_minus_one():
    prof = g1_profile(CharacteristicTriplet(1.0, 0.0, DOWN1), degenerate_law(1.0))
    assert prof.verdict == VIOLATED_AT and prof.witness == pytest.approx(math.e - 1, abs=0.02)


@pytest.mark.parametrize("gamma", [1.0, 2.0])
def test_g1_pareto_ggc_agrees_with_laplace_test(gamma):
    xi = CharacteristicTriplet(gamma, 0.0, DOWN1)
    mu = pareto_ggc_law(0.5)
    assert g1_profile(xi, mu).verdict == NON_DECREASING
    assert range_membership(xi, mu).outcome == "InRange"


def test_g1_preconditions():
    with pytest.raises(PreconditionViolated):
        g1_profile(CharacteristicTriplet(1.0, 1.0), gamma_law(1.0, 1.0))
    with pytest.raises(PreconditionViolated):
        g1_profile(CharacteristicTriplet(1.0, 0.0, CompoundPoisson(1.0, PointMasses((0.5,), (1.0,)))),
                   gamma_law(1.0, 1.0))


def test_g2_profiles():
    good = g2_profile(CharacteristicTriplet(2.0, 1.0), _cubic_law(), GridConfig(h=1e-2, t_max=200.0))
    assert good.verdict == NON_DECREASING and good.limit == pytest.approx(1.125)
    bad = g2_profile(CharacteristicTriplet(0.5, 1.0), _cubic_law(), GridConfig(h=1e-2, t_max=200.0))
    assert bad.verdict == VIOLATED_AT and bad.witness == pytest.approx(1.77, abs=0.05)
    jumpy = CharacteristicTriplet(2.0, 1.0, CompoundPoisson(0.3, PointMasses((-0.5,), (1.0,))))
    assert g2_profile(jumpy, _cubic_law(), GridConfig(h=1e-2, t_max=200.0)).verdict == NON_DECREASING


def test_g2_ggc_violation_matches_bracket_witness():
    rho = StieltjesRepr(0.0, (1.0,), (1.0,))
    prof = g2_profile(CharacteristicTriplet(1.0, 1.0), bo_to_ggc(rho))
    assert prof.verdict == VIOLATED_AT
    assert prof.witness == pytest.approx(ggc_bm_exclusion_witness(rho, 1.0, 1.0), abs=0.05)


def test_g2_slow_tail_edge_condition():
    # k(t) = 1 / log(e + t): t g(t) decays like 1 / log(t)**2
    k = lambda t: 1.0 / np.log(np.e + np.asarray(t, float))
    g = lambda t: 1.0 / ((np.e + np.asarray(t, float)) * np.log(np.e + np.asarray(t, float)) ** 2)
    mu = LaplaceExponent(lambda u: np.zeros_like(np.asarray(u, float)), name="slow",
                         repr=BernsteinRepr(drift=0.0, k=k, k0=1.0, driving_density=g))
    with pytest.raises(EdgeConditionViolated):
        g2_profile(CharacteristicTriplet(1.0, 1.0), mu, GridConfig(h=1e-2, t_max=1000.0))


def test_g2_preconditions():
    with pytest.raises(PreconditionViolated):
        g2_profile(CharacteristicTriplet(1.0), _cubic_law())
    with pytest.raises(PreconditionViolated):
        g2_profile(CharacteristicTriplet(1.0, 2.0), inverse_gamma_law(1.0, 1.0))
    with pytest.raises(PreconditionViolated):
        g2_profile(CharacteristicTriplet(1.0, 1.0), degenerate_law(1.0))


def test_nested_normalize():
    xi = CharacteristicTriplet(3.0, 2.0, DOWN1)
    n = nested_normalize(xi)
    assert n.gamma == 1.5 and n.sigma2 == 1.0 and n.nu.mass_minus == pytest.approx(0.5)
    with pytest.raises(ZeroGaussianPart):
        nested_normalize(CharacteristicTriplet(1.0))


def test_thin_jumps_bound_and_rejection():
    xi = CharacteristicTriplet(1.0, 0.0, DOWN1)
    assert thin_jump_bound(xi, 0.25) == pytest.approx(1.75)
    out = thin_jumps(xi, 0.25, 2.0)
    assert out.nu.mass_minus == pytest.approx(0.25) and out.gamma == 2.0
    with pytest.raises(DriftCompensationTooSmall) as info:
        thin_jumps(xi, 0.25, 1.5)
    assert info.value.witness == pytest.approx(1.75)
    with pytest.raises(ValueError):
        thin_jumps(xi, 0.0, 2.0)


def test_ggc_bracket_and_witness():
    t = np.geomspace(1e-3, 10, 50)
    rho = StieltjesRepr(0.0, (1.0, 2.0), (1.0, 1.0))
    b = ggc_bm_bracket(rho, 1.0, 1.0, t)
    assert b[0] > 0
    assert ggc_bm_exclusion_witness(rho, 1.0, 1.0) == pytest.approx(2.105, abs=0.01)
    assert ggc_bm_exclusion_witness(StieltjesRepr(0.0, (1.0,), (1.0,)), 1.0, 1.0) == pytest.approx(2.502, abs=0.01)
    with pytest.raises(PreconditionViolated):
        ggc_bm_exclusion_witness(StieltjesRepr(0.0, (1.0,), (0.0,)), 1.0, 1.0)
