"""Closed-form equilibrium family of the finite atomization model.

For monomer density ``z > 0`` the equilibrium densities are

    nbar_ell = (K z^M + z^ell (z - 1 - K)) / (K z^N + z - 1 - K),

with the removable singularity at ``z = 1`` where

    nbar_ell = (1 + (M - ell) K) / (1 + N K).

Internally the general formula is evaluated through geometric sums
``g_m(z) = (z^m - 1)/(z - 1)`` as

    nbar_ell = z^ell (K g_{M-ell}(z) + 1) / (K g_N(z) + 1),

which is manifestly positive for ``z > 0`` and free of the catastrophic
cancellation that the raw quotient suffers near ``z = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import ModelParams

__all__ = [
    "EquilibriumProfile",
    "general_equilibrium",
    "mass_of_equilibrium",
    "find_z_for_mass",
]

# Below this distance from z=1 the z=1 closed form is used; the geometric-sum
# branch is cancellation-free, so the window only needs to dodge division by
# an exactly zero z-1.
_Z1_TOL = 1e-12
# Above this value of N*log(z) the formulas are rescaled by z^N.
_LOG_OVERFLOW = 600.0


@dataclass(frozen=True)
class EquilibriumProfile:
    """Equilibrium at monomer density ``z``: densities, mass, and flux."""

    z: float
    alpha: float
    densities: np.ndarray
    mass: float
    J: float

    def __post_init__(self):
        arr = np.asarray(self.densities, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "densities", arr)


def _alpha(p: ModelParams, z: float) -> float:
    """Coefficient of the ``z^ell`` mode; singular (returns nan) at z=1."""
    if abs(z - 1.0) < _Z1_TOL:
        return math.nan
    logz = math.log(z)
    if p.N * logz > _LOG_OVERFLOW:
        t = (z - 1.0 - p.K) * math.exp(-p.N * logz)
        return t / (p.K + t)
    den = p.K * math.expm1(p.N * logz) + (z - 1.0)
    return (z - 1.0 - p.K) / den


def general_equilibrium(p: ModelParams, z: float) -> EquilibriumProfile:
    """Equilibrium profile with monomer density ``nbar_1 = z > 0``."""
    if not (z > 0):
        raise ValueError(f"monomer density z must be positive, got {z}")
    M, N, K = p.M, p.N, p.K
    ells = np.arange(1, M + 1, dtype=float)

    if abs(z - 1.0) < _Z1_TOL:
        dens = (1.0 + (M - ells) * K) / (1.0 + N * K)
        J = K / (1.0 + N * K)
    else:
        logz = math.log(z)
        if N * logz > _LOG_OVERFLOW:
            # Divide numerator and denominator of the raw quotient by z^N.
            zc = z - 1.0 - K
            den = K + zc * math.exp(-N * logz)
            dens = (K * z + zc * np.exp((ells - N) * logz)) / den
            J = K * z / den
        else:
            den = K * math.expm1(N * logz) / (z - 1.0) + 1.0
            g = np.expm1((M - ells) * logz) / (z - 1.0)
            dens = np.exp(ells * logz) * (K * g + 1.0) / den
            J = K * math.exp(M * logz) / den
    assert np.all(dens > 0), "equilibrium densities must be positive for z>0"
    mass = float(np.arange(1, M + 1) @ dens)
    return EquilibriumProfile(z=float(z), alpha=_alpha(p, z), densities=dens, mass=mass, J=float(J))


def mass_of_equilibrium(p: ModelParams, z: float) -> float:
    """Total mass ``sum_ell ell * nbar_ell`` of the equilibrium at ``z``.

    Evaluates the closed form ``alpha*mu_M(z) + (1-alpha)*z*mu_M(1)`` with
    ``mu_M(z) = sum_ell ell z^ell``, rearranged as
    ``z*mu_M(1) + (z-1-K)*D/(K*(z^N-1) + (z-1))`` with
    ``D = sum_ell ell*z*(z^{ell-1}-1)`` so that the singular factors of
    ``alpha`` cancel analytically near ``z = 1``.
    """
    if not (z > 0):
        raise ValueError(f"z must be positive, got {z}")
    M, N, K = p.M, p.N, p.K
    mu1 = M * (M + 1) / 2.0
    if abs(z - 1.0) < _Z1_TOL:
        sum_sq = M * (M + 1) * (2 * M + 1) / 6.0
        return (mu1 * (1.0 + K * M) - K * sum_sq) / (1.0 + N * K)
    ells = np.arange(1, M + 1, dtype=float)
    logz = math.log(z)
    if N * logz > _LOG_OVERFLOW:
        zc = z - 1.0 - K
        t = zc * math.exp(-N * logz)
        alpha = t / (K + t)
        # alpha * mu_M(z), with mu_M(z)/z^N summed without overflow
        mu_scaled = float(ells @ np.exp((ells - N) * logz))
        return zc * mu_scaled / (K + t) + (1.0 - alpha) * z * mu1
    D = z * float(ells @ np.expm1((ells - 1.0) * logz))
    den = K * math.expm1(N * logz) + (z - 1.0)
    return z * mu1 + (z - 1.0 - K) * D / den


def find_z_for_mass(p: ModelParams, target_mass: float, z_max: float = 1e6) -> float:
    """Invert the mass map: find ``z`` with ``mass_of_equilibrium(z) = target``.

    The mass map is strictly increasing in ``z``; monotonicity is asserted on
    the bracketing samples rather than proven.  Raises ``ValueError`` when the
    target cannot be bracketed below ``z_max``.
    """
    if not (target_mass > 0):
        raise ValueError("target mass must be positive")

    def f(z):
        return mass_of_equilibrium(p, z) - target_mass

    lo, hi = 1e-12, 1.0
    while f(hi) < 0.0:
        lo = hi
        hi *= 2.0
        if hi > z_max:
            raise ValueError(f"target mass {target_mass} not reachable below z={z_max}")
    samples = np.geomspace(max(lo, 1e-12), hi, 9)
    masses = [mass_of_equilibrium(p, s) for s in samples]
    assert all(m2 > m1 for m1, m2 in zip(masses, masses[1:])), (
        "mass map is not increasing on the bracket; inversion is ill-posed"
    )
    z = brentq(f, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
    # Newton polish; the derivative is approximated by a relative secant step
    for _ in range(5):
        err = f(z)
        if abs(err) <= 1e-10 * target_mass:
            break
        h = 1e-7 * z
        slope = (f(z + h) - err) / h
        z -= err / slope
    return float(z)
