import numpy as np
import pytest

from bubbelator.model import (
    ModelParams,
    StateVector,
    fluxes,
    is_physical,
    rhs,
    total_mass,
)


@pytest.mark.parametrize("M,K", [(3, 0.5), (7, 1.3), (25, 3.0), (60, 0.1)])
def test_mass_is_conserved_by_rhs(M, K):
    p = ModelParams(M, K)
    rng = np.random.default_rng(M)
    for _ in range(5):
        s = StateVector(rng.uniform(0.1, 5.0, M))
        weights = np.arange(1, M + 1)
        assert abs(weights @ rhs(p, s)) <= 1e-10 * total_mass(p, s)


def test_rhs_matches_flux_balance():
    p = ModelParams(9, 0.7)
    rng = np.random.default_rng(1)
    s = StateVector(rng.uniform(0.5, 2.0, 9))
    J = fluxes(p, s)
    out = rhs(p, s)
    # interior: gain from below, loss to above
    for ell in range(2, 9):
        assert out[ell - 1] == pytest.approx(J[ell - 2] - J[ell - 1])
    assert out[-1] == pytest.approx(J[-1] - p.K * s.n[-1])


def test_rhs_vanishes_at_constant_equilibrium():
    # nbar_ell = A makes every flux equal to K and the top equation balance
    p = ModelParams(25, 3.0)
    s = StateVector(np.full(25, p.A))
    assert np.max(np.abs(rhs(p, s))) == 0.0


def test_derived_parameters():
    p = ModelParams(100, 0.2)
    assert p.N == 99
    assert p.A == 1.2
    assert p.kappa == pytest.approx(2.0)
    assert p.eps == pytest.approx(0.1)
    q = ModelParams.from_kappa(100, 2.0)
    assert q.K == pytest.approx(0.2)


def test_parameter_validation():
    with pytest.raises(ValueError):
        ModelParams(2, 1.0)
    with pytest.raises(ValueError):
        ModelParams(10, 0.0)
    with pytest.raises(ValueError):
        ModelParams(10, -1.0)


def test_state_validation_and_immutability():
    p = ModelParams(5, 1.0)
    s = StateVector(np.ones(5))
    with pytest.raises(ValueError):
        s.n[0] = 2.0
    with pytest.raises(ValueError):
        rhs(p, StateVector(np.ones(4)))
    with pytest.raises(ValueError):
        rhs(p, StateVector(np.array([1.0, np.nan, 1, 1, 1])))


def test_is_physical():
    assert is_physical(StateVector(np.ones(4)))
    assert not is_physical(StateVector(np.array([1.0, -0.1, 1, 1])))
