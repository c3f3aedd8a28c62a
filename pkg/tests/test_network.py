import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcool.gaussian import sigma_matrix, validate_system
from entcool.kalman import stationary_covariance
from entcool.network import (
    CouplingMatrix,
    NetworkConfig,
    beam_splitter,
    homodyne_selectors,
    loss_stage,
    network_scattering,
    rephase,
)
from entcool.oscillator import DEFAULT_PARAMS, build_system

I2 = np.eye(2)
O2 = np.zeros((2, 2))
unit = st.floats(0, 1)
phase = st.floats(-np.pi, np.pi)


def test_config_rejects_out_of_range():
    with pytest.raises(ValueError):
        NetworkConfig(1.2)
    with pytest.raises(ValueError):
        NetworkConfig(0.5, delta_sq=-0.1)


def test_coupling_stacking():
    c = np.array([0.3 + 0.1j, -1.0, 2j, 0.5 - 0.5j])
    cm = CouplingMatrix.from_vector(c)
    assert np.allclose(cm.cbar[0], np.sqrt(2) * c.real)
    assert np.allclose(cm.cbar[1], np.sqrt(2) * c.imag)
    assert cm.n == 2


def test_transparent_splitter():
    assert np.array_equal(beam_splitter(0.0), np.eye(6))


def test_full_reflection():
    expected = np.block([[O2, I2, O2], [-I2, O2, O2], [O2, O2, I2]])
    assert np.allclose(beam_splitter(1.0), expected, atol=0)


def test_no_loss_is_identity():
    assert np.array_equal(loss_stage(0.0), np.eye(6))


def test_total_loss_swaps_in_vacuum():
    t = loss_stage(1.0)
    # the output channel is made entirely of the vacuum input
    assert np.array_equal(t[:2, :], np.hstack([O2, O2, I2]))


@given(unit)
def test_splitter_and_loss_orthogonal(b):
    for t in (beam_splitter(b), loss_stage(b)):
        assert np.allclose(t @ t.T, np.eye(6), atol=1e-12)


@given(unit, unit, unit)
def test_scattering_orthogonal(b1, b2, d):
    t = network_scattering(NetworkConfig(b1, b2, d))
    assert np.allclose(t @ t.T, np.eye(6), atol=1e-12)


def test_selectors_zero_phase():
    sel = homodyne_selectors(0.0, 0.0)
    assert np.array_equal(sel, [[1, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0]])


def test_selectors_quarter_phase():
    assert np.allclose(homodyne_selectors(np.pi / 2, 0.0)[0], [0, 1, 0, 0, 0, 0], atol=1e-15)


@given(phase, phase)
def test_selector_rows_unit_norm(t1, t2):
    assert np.allclose(np.linalg.norm(homodyne_selectors(t1, t2), axis=1), 1.0)


@settings(max_examples=100, deadline=None)
@given(unit, unit, unit, phase, phase)
def test_measurement_commutes(b1, b2, d, t1, t2):
    sys = build_system(NetworkConfig(b1, b2, d, t1, t2), bath=False)
    assert np.abs(sys.D @ sigma_matrix(3) @ sys.D.T).max() < 1e-12
    assert validate_system(sys) == []


def test_standard_setup():
    sys = build_system(NetworkConfig(1.0, 0.0, 0.0, 0.3, 0.7), bath=False)
    # the squeezed channel neither drives the system nor reaches detector 1
    assert not sys.B[:, :2].any()
    assert np.abs(sys.D[0, :2]).max() < 1e-15
    assert np.abs(sys.C[1]).max() < 1e-15
    assert np.abs(sys.C[0]).max() > 0.1


def test_input_matrix_beta_zero():
    # B = [S C^T s, 0, 0] with C = 2 [[0,0,1,0],[0,0,0,1]]
    sys = build_system(NetworkConfig(0.0), bath=False)
    expected = np.zeros((4, 6))
    expected[2, 0] = expected[3, 1] = -2.0
    assert np.allclose(sys.B, expected, atol=1e-15)


def test_structural_drift_golden():
    w, lam, k, d = DEFAULT_PARAMS.omega, DEFAULT_PARAMS.lam, DEFAULT_PARAMS.kappa, DEFAULT_PARAMS.delta_detuning
    expected = np.array(
        [
            [0, w, 0, 0],
            [-w, 0, lam, 0],
            [0, 0, -k / 2, d],
            [lam, 0, -d, -k / 2],
        ]
    )
    for b1 in (0.0, 0.3, 1.0):
        sys = build_system(NetworkConfig(b1, 0.2, 0.9), bath=False)
        assert np.allclose(sys.A, expected, atol=1e-14)


def test_rephase_matches_rebuild(ent_sys):
    cfg = NetworkConfig(0.7, 0.0, 0.9, 0.4, 2.1)
    a = rephase(ent_sys, cfg)
    b = build_system(cfg)
    assert np.allclose(a.D, b.D, atol=1e-15)
    assert np.allclose(a.C, b.C, atol=1e-15)


@pytest.mark.parametrize("b1,d", [(0.3, 0.9), (0.7, 0.5), (1.0, 0.1)])
def test_swap_symmetry(b1, d):
    sys = build_system(NetworkConfig(b1, 0.0, d, 1.0, 2.0))
    perm = np.array([[0.0, 1.0], [1.0, 0.0]])
    swapped = sys.replace(C=perm @ sys.C, D=perm @ sys.D)
    v = stationary_covariance(sys).v
    assert np.allclose(stationary_covariance(swapped).v, v, atol=1e-11)
