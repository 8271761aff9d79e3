import numpy as np
import pytest
from scipy import stats

from expfunc import _kernels as K
from expfunc.errors import PreconditionViolated, UnsupportedProcess
from expfunc.jumps import Exponential, NormalSquared, PointMasses
from expfunc.levy import CharacteristicTriplet, CompoundPoisson, ExponentialTail, SubordinatorSpec, Tabulated
from expfunc.montecarlo import (
    EmpiricalDistribution,
    SimConfig,
    ks_distance,
    ks_report,
    simulate_functional,
    simulate_poisson_poisson,
)

GAMMA_ETA = SubordinatorSpec(0.0, CompoundPoisson(1.0, Exponential(theta=1.0)))


def test_ziggurat_normals():
    z = K.sample_normals(200_000, 11, K.ZW, K.ZK, K.ZF)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01
    assert stats.kstest(z, "norm").statistic < 0.005


def test_deterministic_functional_is_exact():
    e = simulate_functional(CharacteristicTriplet(1.0), SubordinatorSpec(1.0), SimConfig(n_samples=10))
    assert np.allclose(e.values, 1.0)


def test_gamma_law_from_compound_poisson():
    e = simulate_functional(CharacteristicTriplet(1.0), GAMMA_ETA, SimConfig(n_samples=50_000, seed=1))
    assert ks_distance(e, stats.gamma(1.0).cdf) < 0.01
    assert e.values.mean() == pytest.approx(1.0, abs=0.02)


def test_seed_determinism_and_shard_invariance():
    xi = CharacteristicTriplet(1.0, 0.5, CompoundPoisson(0.5, PointMasses((-0.3,), (1.0,))))
    cfg = SimConfig(n_samples=3000, seed=5, h=1e-2)
    a = simulate_functional(xi, GAMMA_ETA, cfg)
    b = simulate_functional(xi, GAMMA_ETA, SimConfig(n_samples=3000, seed=5, h=1e-2, shards=3))
    c = simulate_functional(xi, GAMMA_ETA, SimConfig(n_samples=3000, seed=6, h=1e-2))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_truncation_metadata():
    e = simulate_functional(CharacteristicTriplet(1.0), GAMMA_ETA, SimConfig(n_samples=2000, delta=1e-6))
    assert 0 < e.meta["truncation_bound"] < 1e-4
    s = e.summary()
    assert s["n"] == 2000 and s["q01"] <= s["q50"] <= s["q99"]


def test_fixed_horizon_gives_partial_integral():
    e = simulate_functional(CharacteristicTriplet(1.0), SubordinatorSpec(1.0), SimConfig(n_samples=5, horizon=2.0))
    assert np.allclose(e.values, 1 - np.exp(-2.0))


def test_continuous_jump_laws_are_sampled():
    # Exp(1) and normal-squared jumps of eta: compare the mean with E eta_1 / E xi_1
    eta = SubordinatorSpec(0.0, CompoundPoisson(1.0, NormalSquared(scale=2.0)))
    e = simulate_functional(CharacteristicTriplet(2.0), eta, SimConfig(n_samples=40_000, seed=2))
    assert e.values.mean() == pytest.approx(2.0 / 2.0, rel=0.03)
    tab = SubordinatorSpec(0.0, Tabulated((0.1, 0.5, 1.0, 2.0, 4.0), (1.0, 1.0, 0.6, 0.2, 0.01)))
    e = simulate_functional(CharacteristicTriplet(1.0), tab, SimConfig(n_samples=20_000, seed=3))
    mean_jump = tab.nu.expect(lambda t: t, 0.0, np.inf)
    assert e.values.mean() == pytest.approx(mean_jump, rel=0.05)


def test_negative_continuous_jumps_of_xi():
    xi = CharacteristicTriplet(2.0, 0.0, ExponentialTail(0.5, 2.0, side=-1))
    e = simulate_functional(xi, SubordinatorSpec(1.0), SimConfig(n_samples=40_000, seed=4))
    # E V = a / Phi(1) with Phi(1) = gamma0 - int (e^{-x} - 1) nu(dx); jump magnitudes are Exp(2) at rate 0.5
    g0 = 2.0 + 0.5 * (1 - 3.0 * np.exp(-2.0)) / 2.0
    psi1 = g0 - 0.5 * (2.0 / (2.0 - 1.0) - 1.0)
    assert e.values.mean() == pytest.approx(1.0 / psi1, rel=0.02)


def test_rejections():
    with pytest.raises(PreconditionViolated):
        simulate_functional(CharacteristicTriplet(-1.0), GAMMA_ETA, SimConfig(n_samples=10))
    with pytest.raises(ValueError):
        SimConfig(n_samples=0)


def test_poisson_poisson_mean():
    e = simulate_poisson_poisson(2.0, 0.5, 0.5, SimConfig(n_samples=50_000, seed=9))
    assert e.meta["mean_exact"] == pytest.approx(2.0)
    assert e.values.mean() == pytest.approx(2.0, abs=0.05)


def test_ks_handles_atoms():
    values = np.array([0.0] * 50 + list(np.linspace(0.01, 1, 50)))
    e = EmpiricalDistribution(values)
    target = lambda x: np.where(np.asarray(x) < 0, 0.0, 0.5 + 0.5 * np.clip(np.asarray(x), 0, 1))
    assert ks_distance(e, target) < 0.03
    assert ks_report(e, target)["clamped_fraction"] == 0.0


def test_ks_detects_a_shift():
    e = EmpiricalDistribution(np.random.default_rng(0).exponential(size=5000))
    assert ks_distance(e, stats.expon(loc=0.2).cdf) > 0.15
