import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcool.gaussian import NoiseCorrelation, SystemModel, sigma_matrix, vacuum_block
from entcool.kalman import (
    CovarianceMatrix,
    DegenerateMeasurementError,
    UnstableSystemError,
    closed_loop_rate,
    kalman_gain,
    riccati_rhs,
    stationary_covariance,
    unconditional_covariance,
)
from entcool.network import NetworkConfig
from entcool.oscillator import OscillatorParams, build_system
from entcool.riccati import (
    ConvergenceError,
    RiccatiOptions,
    integrate_to_steady_state,
)

# Frozen from the ODE route (RK45 to steady state, vacuum start) at the
# working points defined in conftest.
V_SQL = np.array([
    [1.7505062902403419, 0.005407091967682432, 0.08431090860873997, 0.17750660216412162],
    [0.005407091967682432, 1.7128771273567807, -0.007078810195676199, -0.0821102341545131],
    [0.08431090860873997, -0.007078810195676199, 0.50513511075006, 0.010323144165951967],
    [0.17750660216412162, -0.0821102341545131, 0.010323144165951967, 0.5213522939743919],
])
K_SQL = np.array([
    [0.24825031272784265, 0.0],
    [-0.09938268118255338, 0.0],
    [0.01454959323575869, 0.0],
    [0.029949860400392714, 0.0],
])
V_ENT = np.array([
    [1.5914536343746282, 0.001734073730472886, 0.06141362414385185, 0.16368457215305382],
    [0.001734073730472886, 1.5627755912410286, -0.02008585985057114, -0.07431400193798368],
    [0.06141362414385185, -0.02008585985057114, 0.2882673059765789, -0.03938273305278461],
    [0.16368457215305382, -0.07431400193798368, -0.03938273305278461, 0.9923419412345379],
])
K_ENT = np.array([
    [0.2123675656890636, 0.07771667479233553],
    [-0.09279016077832045, -0.03395689320889845],
    [0.1879652290883197, 0.6199040247177835],
    [0.12975938589358438, 2.324395593358461],
])


def _decoupled(params):
    return build_system(NetworkConfig(0.5, 0.0, 0.9, 0.3, 0.4), params)


def test_sql_fixture(sql_sys):
    v = stationary_covariance(sql_sys)
    assert np.allclose(v.v, V_SQL, rtol=0, atol=1e-12)
    assert np.allclose(kalman_gain(v, sql_sys).k, K_SQL, rtol=0, atol=1e-12)


def test_entangled_fixture(ent_sys):
    v = stationary_covariance(ent_sys)
    assert np.allclose(v.v, V_ENT, rtol=0, atol=1e-12)
    assert np.allclose(kalman_gain(v, ent_sys).k, K_ENT, rtol=0, atol=1e-12)


def test_ode_and_schur_routes_agree(lossy_sys):
    a = stationary_covariance(lossy_sys, RiccatiOptions(method="ode"))
    b = stationary_covariance(lossy_sys)
    assert a.residual <= 1e-10 and b.residual <= 1e-10
    assert np.allclose(a.v, b.v, rtol=0, atol=1e-10)


def test_rhs_vanishes_at_steady_state(sql_sys):
    v = stationary_covariance(sql_sys)
    assert np.abs(riccati_rhs(v, sql_sys)).max() <= 1e-10


def test_gain_zero_without_information():
    nc = NoiseCorrelation.from_blocks([vacuum_block()])
    sys = SystemModel.structured(np.eye(2), np.zeros((2, 2)), np.array([[1.0, 0.0]]), np.eye(2), nc)
    assert not kalman_gain(0.5 * np.eye(2), sys).k.any()


def test_gain_affine_in_covariance(sql_sys):
    rinv = np.linalg.inv(sql_sys.innovation_cov)
    k1 = kalman_gain(V_SQL, sql_sys).k
    k2 = kalman_gain(2 * V_SQL, sql_sys).k
    assert np.allclose(k2 - k1, V_SQL @ sql_sys.C.T @ rinv, atol=1e-14)


def test_rhs_without_output_is_corrected_lyapunov(rng):
    # C = 0 leaves the Lyapunov flow minus the noise cross-correlation term
    sys = build_system(NetworkConfig(0.5, 0.0, 0.9, 0.3, 0.4))
    blind = sys.replace(C=np.zeros_like(sys.C))
    v = rng.normal(size=(4, 4))
    v = v @ v.T
    a = blind.drift
    s = blind.cross
    expected = a @ v + v @ a.T + blind.diffusion - s @ np.linalg.solve(blind.innovation_cov, s.T)
    assert np.allclose(riccati_rhs(v, blind), expected, atol=1e-12)


def test_rhs_contains_thermal_term(sql_sys):
    bare = sql_sys.replace(extra_drift=None, extra_diffusion=None)
    diff = riccati_rhs(np.zeros((4, 4)), sql_sys) - riccati_rhs(np.zeros((4, 4)), bare)
    assert np.allclose(diff, 1e-7 * (2e5 + 1) * np.diag([1.0, 1.0, 0.0, 0.0]), rtol=1e-12)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@pytest.mark.parametrize("scale", [1.0, 0.5])
def test_decoupled_oscillator_is_thermal(scale):
    # lambda = kappa = 0: the oscillator block is the bath balance
    # scale * gamma (2 nbar + 1) / gamma. A fast bath keeps the flow short.
    # The undamped, unobserved cavity has no unique stationary block.
    params = OscillatorParams(lam=0.0, kappa=0.0, gamma=0.1, nbar=10.0, bath_diffusion_scale=scale)
    v = stationary_covariance(_decoupled(params)).v
    assert np.allclose(v[:2, :2], scale * 21.0 * np.eye(2), rtol=1e-9, atol=1e-9)


def test_default_bath_balance_is_twice_thermal():
    # the default diffusion gamma (2 nbar + 1) against drift -gamma/2
    # settles at 2 nbar + 1, not nbar + 1/2
    v = stationary_covariance(_decoupled(OscillatorParams(lam=0.0))).v
    assert np.allclose(v[:2, :2], (2e5 + 1) * np.eye(2), rtol=1e-9)


def test_decoupled_oscillator_independent_of_measurement():
    params = OscillatorParams(lam=0.0, bath_diffusion_scale=0.5)
    blocks = [
        stationary_covariance(build_system(NetworkConfig(b, b2, d, t1, t2), params)).v[:2, :2]
        for b, b2, d, t1, t2 in [(0.0, 0.0, 0.9, 0.0, 0.0), (0.6, 0.2, 0.1, 1.0, 2.0)]
    ]
    for blk in blocks:
        assert np.allclose(blk, (1e5 + 0.5) * np.eye(2), rtol=1e-9)


def test_initial_condition_independence(sql_sys):
    a = stationary_covariance(sql_sys, RiccatiOptions(method="ode", x0=0.6 * np.eye(4)))
    b = stationary_covariance(sql_sys, RiccatiOptions(method="ode", x0=10 * np.eye(4)))
    assert np.abs(a.v - b.v).max() < 1e-8


def test_flow_preserves_symmetry(sql_sys):
    seen = []

    def rhs(x):
        seen.append(np.abs(x - x.T).max())
        return riccati_rhs(x, sql_sys)

    integrate_to_steady_state(rhs, 0.5 * np.eye(4), RiccatiOptions(method="ode"))
    assert max(seen) < 1e-11


def test_nonconvergence_raises_with_history(sql_sys):
    with pytest.raises(ConvergenceError) as info:
        stationary_covariance(sql_sys, RiccatiOptions(method="ode", max_steps=20))
    assert len(info.value.history) == 20


def test_degenerate_measurement(sql_sys):
    with pytest.raises(DegenerateMeasurementError) as info:
        stationary_covariance(sql_sys.replace(D=np.zeros_like(sql_sys.D)))
    assert info.value.cond > 1e12


def test_unconditional_pure_damping():
    # one damped mode with thermal diffusion: V = diffusion / gamma
    nc = NoiseCorrelation.from_blocks([vacuum_block()])
    sys = SystemModel.structured(
        np.zeros((2, 2)), np.zeros((2, 2)), np.array([[1.0, 0.0]]), np.eye(2), nc,
        extra_drift=-0.5 * np.eye(2), extra_diffusion=3.5 * np.eye(2),
    )
    assert np.allclose(unconditional_covariance(sys).v, 3.5 * np.eye(2))


def test_unconditional_without_noise_is_zero():
    nc = NoiseCorrelation.from_blocks([vacuum_block()])
    sys = SystemModel.structured(
        np.zeros((2, 2)), np.zeros((2, 2)), np.array([[1.0, 0.0]]), np.eye(2), nc,
        extra_drift=-np.eye(2),
    )
    assert not unconditional_covariance(sys).v.any()


def test_unconditional_rejects_unstable(sql_sys):
    with pytest.raises(UnstableSystemError):
        unconditional_covariance(sql_sys.replace(extra_drift=np.eye(4)))


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, np.pi), st.floats(0, np.pi))
def test_conditioning_reduces_uncertainty(b1, b2, d, t1, t2):
    sys = build_system(NetworkConfig(b1, b2, d, t1, t2))
    v = stationary_covariance(sys)
    assert v.violations() == []
    gap = unconditional_covariance(sys).v - v.v
    assert np.linalg.eigvalsh(gap).min() > -1e-9 * np.abs(gap).max()


def test_covariance_independent_of_actuation(sql_sys):
    moved = sql_sys.replace(F=np.ones((4, 2)))
    assert np.array_equal(stationary_covariance(moved).v, stationary_covariance(sql_sys).v)


def test_uncertainty_check_flags_subvacuum():
    v = CovarianceMatrix(0.3 * np.eye(4))
    assert any("uncertainty" in p for p in v.violations())
    assert CovarianceMatrix(0.5 * np.eye(4)).violations() == []


def test_error_dynamics_stable(sql_sys):
    v = stationary_covariance(sql_sys)
    assert closed_loop_rate(sql_sys, kalman_gain(v, sql_sys)) > 0
    assert np.allclose(sigma_matrix(2) @ sigma_matrix(2), -np.eye(4))
