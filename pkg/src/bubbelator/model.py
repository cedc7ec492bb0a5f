"""Finite cluster-growth model with linear atomization of the largest size.

Clusters of size ``ell`` grow by monomer attachment at rate ``n_ell * n_1``
and shrink by monomer loss at unit rate, for ``1 <= ell <= N = M - 1``.
Clusters of the largest size ``M`` atomize into ``M`` monomers at rate
``K * n_M``.  The resulting ODE system conserves the total mass
``sum_ell ell * n_ell``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "StateVector",
    "fluxes",
    "rhs",
    "total_mass",
    "is_physical",
]


@dataclass(frozen=True)
class ModelParams:
    """System size and atomization rate, with derived constants.

    Attributes
    ----------
    M : int
        Number of cluster sizes (largest cluster size), ``M >= 3``.
    K : float
        Atomization rate of the largest clusters, ``K > 0``.
    """

    M: int
    K: float

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 3:
            raise ValueError(f"M must be an integer >= 3, got {self.M}")
        if not (self.K > 0):
            raise ValueError(f"K must be positive, got {self.K}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "K", float(self.K))

    @property
    def N(self) -> int:
        """Largest flux index, ``M - 1``."""
        return self.M - 1

    @property
    def A(self) -> float:
        """Constant-equilibrium density level, ``1 + K``."""
        return 1.0 + self.K

    @property
    def kappa(self) -> float:
        """Scaled bifurcation parameter ``K * sqrt(M)``."""
        return self.K * np.sqrt(self.M)

    @property
    def eps(self) -> float:
        """Small parameter ``1 / sqrt(M)``."""
        return 1.0 / np.sqrt(self.M)

    @staticmethod
    def from_kappa(M: int, kappa: float) -> "ModelParams":
        """Build parameters from ``kappa`` via ``K = kappa / sqrt(M)``."""
        return ModelParams(M, kappa / np.sqrt(M))


@dataclass(frozen=True)
class StateVector:
    """Number densities ``n_1 .. n_M`` at one time instant.

    The density array is copied and frozen at construction; states are safe
    to share between threads.
    """

    n: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        arr = np.array(self.n, dtype=float, copy=True)
        if arr.ndim != 1:
            raise ValueError("state must be a 1-d density array")
        arr.setflags(write=False)
        object.__setattr__(self, "n", arr)
        object.__setattr__(self, "t", float(self.t))

    @property
    def M(self) -> int:
        return self.n.shape[0]


def _check_dims(p: ModelParams, s: StateVector) -> None:
    if s.M != p.M:
        raise ValueError(f"state has length {s.M}, expected M={p.M}")
    if not np.all(np.isfinite(s.n)):
        raise ValueError("state contains non-finite entries")


def fluxes(p: ModelParams, s: StateVector) -> np.ndarray:
    """Net fluxes ``J_ell = n_ell * n_1 - n_{ell+1}`` for ``1 <= ell <= N``.

    Returns an array of length ``N = M - 1`` with ``J[ell-1] = J_ell``.
    """
    _check_dims(p, s)
    n = s.n
    return n[:-1] * n[0] - n[1:]


def rhs(p: ModelParams, s: StateVector) -> np.ndarray:
    """Time derivatives ``(d/dt n_1, ..., d/dt n_M)``.

    The monomer equation is evaluated from its explicit sum (gain of ``M``
    monomers per atomization, loss into every flux), not from the mass
    conservation shortcut, so conservation remains a nontrivial identity.
    """
    _check_dims(p, s)
    n = s.n
    M, K = p.M, p.K
    J = n[:-1] * n[0] - n[1:]
    out = np.empty(M)
    out[1 : M - 1] = J[: M - 2] - J[1 : M - 1]
    out[M - 1] = J[M - 2] - K * n[M - 1]
    out[0] = -J[0] - J.sum() + M * K * n[M - 1]
    return out


def total_mass(p: ModelParams, s: StateVector) -> float:
    """Conserved total mass ``sum_ell ell * n_ell``."""
    _check_dims(p, s)
    weights = np.arange(1, p.M + 1, dtype=float)
    return float(weights @ s.n)


def is_physical(s: StateVector) -> bool:
    """True if all densities are finite and nonnegative.

    Negative densities are permitted in evaluation (the linearization checks
    need them); this predicate flags states that are not physically
    meaningful.
    """
    return bool(np.all(np.isfinite(s.n)) and np.all(s.n >= 0.0))
