import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from entcool.gaussian import (
    NoiseCorrelation,
    SystemModel,
    UnphysicalNoiseError,
    build_structured_matrices,
    is_physical_theta,
    noise_block_from_NM,
    sigma_matrix,
    squeezed_theta,
    symplectic,
    vacuum_block,
    validate_system,
)

VACUUM = 0.5 * np.array([[1, 1j], [-1j, 1]])


def test_symplectic_one_mode():
    assert np.array_equal(symplectic(1).matrix, [[0, 1], [-1, 0]])


def test_symplectic_two_modes_is_block_diagonal():
    s = symplectic(2).matrix
    assert s.shape == (4, 4)
    assert np.array_equal(s[:2, :2], s[2:, 2:])
    assert not s[:2, 2:].any() and not s[2:, :2].any()


@pytest.mark.parametrize("n", range(1, 7))
def test_symplectic_identities(n):
    s = sigma_matrix(n)
    assert np.array_equal(s.T, -s)
    assert np.array_equal(s @ s, -np.eye(2 * n))
    assert np.array_equal(s @ s.T, np.eye(2 * n))


@pytest.mark.parametrize("bad", [0, -1, 1.5])
def test_symplectic_rejects_bad_mode_count(bad):
    with pytest.raises(ValueError):
        symplectic(bad)


def test_vacuum_block():
    assert np.allclose(noise_block_from_NM(0, 0).theta, VACUUM, atol=0)


def test_thermal_block():
    expected = np.array([[1.5, 0.5j], [-0.5j, 1.5]])
    assert np.allclose(noise_block_from_NM(1, 0).theta, expected, atol=0)


def test_squeezed_zero_is_vacuum():
    assert np.allclose(squeezed_theta(0).theta, VACUUM, atol=0)


def test_squeezed_default_value():
    # e^-2.3 = 0.1002588..., e^2.3 = 9.9741824...
    th = squeezed_theta(2.3).theta
    assert th[0, 0].real == pytest.approx(0.5 * 0.100259, abs=5e-7)
    assert th[1, 1].real == pytest.approx(0.5 * 9.97418, abs=5e-6)
    assert th[0, 1] == 0.5j and th[1, 0] == -0.5j


def test_ten_db_squeezing():
    # 10 log10(e^{2r}) at r = 2.3
    th = squeezed_theta(2.3).theta.real
    assert 10 * np.log10(th[1, 1] / th[0, 0]) / 2 == pytest.approx(10.0, abs=0.05)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3))
def test_squeezed_matches_nm_parametrization(r):
    nm = noise_block_from_NM((np.cosh(r) - 1) / 2, -np.sinh(r) / 2)
    sq = squeezed_theta(r)
    assert np.allclose(nm.theta, sq.theta, rtol=0, atol=1e-12)
    assert sq.N == pytest.approx(nm.N) and sq.M == pytest.approx(nm.M)


@given(st.floats(0, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_noise_block_invariants(N, re_m, im_m):
    M = complex(re_m, im_m)
    gap = N * (N + 1) - abs(M) ** 2
    assume(abs(gap) > 1e-6 * (1 + abs(M) ** 2))
    if gap < 0:
        with pytest.raises(UnphysicalNoiseError):
            noise_block_from_NM(N, M)
        return
    th = noise_block_from_NM(N, M).theta
    assert np.array_equal(th, th.conj().T)
    assert th[0, 1] - th[1, 0] == 1j


def test_physicality_is_the_squared_condition():
    # N(N+1) = 2 but |M| = 1.5: passes a linear |M| test, fails the squared one
    with pytest.raises(UnphysicalNoiseError):
        noise_block_from_NM(1.0, 1.5)
    assert is_physical_theta(noise_block_from_NM(1.0, np.sqrt(2.0)).theta)


def test_real_part_psd_is_not_enough():
    # Re(theta) is PSD but the Hermitian block is not
    theta = np.array([[0.3, 0.5j], [-0.5j, 0.3]])
    assert np.linalg.eigvalsh(theta.real).min() > 0
    assert not is_physical_theta(theta)


def test_noise_correlation_roundtrip():
    blocks = [squeezed_theta(1.0), vacuum_block(), noise_block_from_NM(0.5, 0.2j)]
    nc = NoiseCorrelation.from_blocks(blocks)
    full = nc.full
    for j, b in enumerate(blocks):
        assert np.array_equal(full[2 * j : 2 * j + 2, 2 * j : 2 * j + 2], b.theta)
    off = full.copy()
    for j in range(3):
        off[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = 0
    assert not off.any()
    assert np.array_equal(nc.re_theta, full.real)
    assert np.array_equal(nc.im_theta, full.imag)


def test_structured_zero_input():
    G = np.diag([1.0, 2.0, 3.0, 4.0])
    A, C = build_structured_matrices(G, np.zeros((4, 2)), np.array([[1.0, 0.0]]))
    assert np.array_equal(A, sigma_matrix(2) @ G)
    assert not C.any()


def test_structured_pure_damping(rng):
    B = rng.normal(size=(4, 6))
    s2, s3 = sigma_matrix(2), sigma_matrix(3)
    A, _ = build_structured_matrices(np.zeros((4, 4)), B, np.zeros((1, 6)))
    assert np.allclose(A, s2 @ s2.T @ B @ s3 @ B.T @ s2 / 2)


def test_structured_rejects_asymmetric_g():
    G = np.zeros((2, 2))
    G[0, 1] = 1.0
    with pytest.raises(ValueError):
        build_structured_matrices(G, np.zeros((2, 2)), np.zeros((1, 2)))


def test_structured_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        build_structured_matrices(np.eye(4), np.zeros((4, 3)), np.zeros((1, 3)))


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_output_matrix_rebuild_is_idempotent(seed):
    r = np.random.default_rng(seed)
    G = r.normal(size=(4, 4))
    G = G + G.T
    B = r.normal(size=(4, 4))
    D = r.normal(size=(2, 4))
    A1, C1 = build_structured_matrices(G, B, D)
    A2, C2 = build_structured_matrices(G, B, D)
    assert np.array_equal(C1, C2) and np.array_equal(A1, A2)
    assert np.allclose(C1, D @ sigma_matrix(2) @ B.T @ sigma_matrix(2))


def test_validate_clean_model(sql_sys):
    assert validate_system(sql_sys) == []


def test_validate_flags_generic_d(sql_sys, rng):
    D = rng.normal(size=(2, 6))
    bad = sql_sys.replace(D=D, C=D @ sigma_matrix(3) @ sql_sys.B.T @ sigma_matrix(2))
    problems = validate_system(bad)
    assert any("D Sigma_m D^T" in p for p in problems)


def test_validate_flags_perturbed_a(sql_sys):
    A = np.array(sql_sys.A)
    A[0, 2] += 1e-3
    problems = validate_system(sql_sys.replace(A=A))
    assert any(p.startswith("A violates") for p in problems)


def test_system_model_is_immutable(sql_sys):
    with pytest.raises(ValueError):
        sql_sys.A[0, 0] = 1.0


def test_system_model_shape_checks():
    nc = NoiseCorrelation.from_blocks([vacuum_block()])
    with pytest.raises(ValueError):
        SystemModel.structured(np.eye(2), np.zeros((2, 4)), np.zeros((1, 4)), np.eye(2), nc)
