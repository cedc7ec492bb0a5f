import numpy as np
import pytest

from bubbelator.linalg import (
    assemble_B,
    charpoly_coefficients,
    charpoly_oracle_spectrum,
    check_lambda0_simple,
    jacobian_fd,
    left_null_vector,
    right_null_vector,
)
from bubbelator.model import ModelParams, StateVector


def test_hand_checked_matrix_M3():
    B = assemble_B(ModelParams(3, 1.0)).entries
    expect = np.array([[-10.0, 0.0, 4.0], [2.0, -3.0, 1.0], [2.0, 2.0, -2.0]])
    assert np.array_equal(B, expect)


@pytest.mark.parametrize("M,K", [(5, 0.5), (12, 2.0), (40, 0.1)])
def test_matrix_matches_fd_jacobian(M, K):
    p = ModelParams(M, K)
    B = assemble_B(p).entries
    J = jacobian_fd(p, StateVector(np.full(M, p.A)))
    assert np.max(np.abs(B - J)) <= 1e-7 * np.linalg.norm(B, np.inf)


def test_null_vectors_random_parameters():
    rng = np.random.default_rng(7)
    for _ in range(20):
        M = int(rng.integers(3, 201))
        K = float(rng.uniform(0.01, 5.0))
        p = ModelParams(M, K)
        B = assemble_B(p).entries
        tol = 1e-10 * np.linalg.norm(B, np.inf)
        assert np.max(np.abs(left_null_vector(p) @ B)) <= tol
        assert np.max(np.abs(B @ right_null_vector(p))) <= tol


def test_charpoly_constant_term_vanishes():
    # the kernel vector forces det(B) = 0 exactly
    coeffs = charpoly_coefficients(assemble_B(ModelParams(9, 1.5)))
    assert coeffs[-1] == 0
    assert coeffs[0] == 1


@pytest.mark.parametrize("M,K", [(5, 0.3), (8, 1.0), (12, 3.0)])
def test_oracle_agrees_with_dense_eigensolver(M, K):
    p = ModelParams(M, K)
    B = assemble_B(p)
    oracle = charpoly_oracle_spectrum(B).eigenvalues
    dense = np.sort_complex(np.linalg.eigvals(B.entries))
    assert len(oracle) == M
    for lam in dense:
        assert np.min(np.abs(oracle - lam)) <= 1e-8 * (1.0 + abs(lam))


def test_oracle_guard_rejects_large_M():
    with pytest.raises(ValueError):
        charpoly_oracle_spectrum(assemble_B(ModelParams(31, 1.0)))


def test_lambda0_is_simple():
    for M, K in [(5, 0.5), (20, 2.0), (100, 3.0)]:
        assert check_lambda0_simple(assemble_B(ModelParams(M, K)))


def test_spectrum_result_tallies():
    spec = charpoly_oracle_spectrum(assemble_B(ModelParams(12, 1.0)))
    assert spec.n_zero == 1
    # conjugate pairs plus real eigenvalues account for everything
    n_real = int(np.sum(np.abs(spec.eigenvalues.imag) <= 1e-9))
    assert n_real + 2 * spec.n_conjugate_pairs == 12
