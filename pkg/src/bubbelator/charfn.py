"""Characteristic functions encoding the spectrum of the linearization.

Eigenvalues ``lambda`` of the linearization matrix correspond, in pairs
``phi, 1/(A*phi)``, to zeros of the transfer determinant

    F(phi) = -P1 + phi^M P2 + A^{-M} R1 + (A phi)^{-M} R2,

via ``lambda = (A - 1/phi)(phi - 1)``.  ``F0 = -P1 + phi^M P2`` drops the
exponentially small ``A^{-M}`` tail.  In the scaled limit ``M -> infinity``
with ``kappa = K sqrt(M)`` fixed, ``K^{-3} F(1 + z/M)`` converges to

    Q(z; kappa) = e^z (1 + z^2/kappa^2) - (1 + z),

whose roots govern the onset of oscillatory instability.

All evaluations are organized around ``d = phi - 1``: the quantities
``A*phi - 1 = K + A*d`` and ``A*phi^2 - 1 = K + A*d*(phi+1)`` are formed from
``d`` so that no catastrophic cancellation occurs near the double root at
``phi = 1``, where the interesting spectrum lives.  Callers that know
``phi - 1`` exactly (e.g. ``phi = 1 + z/M``) can pass it via ``d``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

__all__ = [
    "PhiLambdaPair",
    "CharfnValue",
    "lambda_of_phi",
    "phi_pair_of_lambda",
    "S_of_phi",
    "F_of_phi",
    "F0_of_phi",
    "F_scale",
    "Q_of_z",
    "Qeps_of_z",
    "lambda_of_z",
]

# exp(x) for x below this underflows past 1e-300; the A^{-M} tail is dropped.
_LOG_TINY = -690.0
_LOG_HUGE = 700.0


@dataclass(frozen=True)
class PhiLambdaPair:
    """A root variable ``phi``, its partner ``1/(A*phi)``, and ``lambda``."""

    phi: complex
    lam: complex
    phi2: complex


@dataclass(frozen=True)
class CharfnValue:
    """Value and analytic ``d/dphi`` (or ``d/dz``) of a characteristic function."""

    value: complex
    derivative: complex
    which: str
    tail_negligible: bool = False


def lambda_of_phi(p: ModelParams, phi: complex) -> complex:
    """``lambda = (A - 1/phi)(phi - 1)``, evaluated as ``(A phi - 1)(phi - 1)/phi``."""
    if phi == 0:
        raise ValueError("phi = 0 is a pole of the eigenvalue map")
    d = phi - 1.0
    return (p.K + p.A * d) * d / phi


def _lambda_of_d(p: ModelParams, d: complex) -> complex:
    return (p.K + p.A * d) * d / (1.0 + d)


def phi_pair_of_lambda(p: ModelParams, lam: complex) -> PhiLambdaPair:
    """Solve ``A phi^2 - (lambda + A + 1) phi + 1 = 0``; ``phi`` is the root
    with the larger modulus (the annulus-side representative)."""
    A = p.A
    b = lam + A + 1.0
    disc = cmath.sqrt(b * b - 4.0 * A)
    # pick the numerically stable quadratic branch
    q = 0.5 * (b + disc) if abs(b + disc) >= abs(b - disc) else 0.5 * (b - disc)
    r1 = q / A
    r2 = 1.0 / q
    phi, phi2 = (r1, r2) if abs(r1) >= abs(r2) else (r2, r1)
    return PhiLambdaPair(phi=phi, lam=lam, phi2=phi2)


def S_of_phi(p: ModelParams, phi: complex) -> complex:
    """Spurious factor ``S(phi) = (phi-1)(A phi - 1)(A phi^2 - 1)``."""
    d = phi - 1.0
    return d * (p.K + p.A * d) * (p.K + p.A * d * (phi + 1.0))


def _clog1p(d: complex) -> complex:
    """Complex ``log(1 + d)`` accurate for small ``|d|``."""
    u = 1.0 + d
    if u == 1.0:
        return d
    return cmath.log(u) * (d / (u - 1.0))


def _cexp_clamped(x: complex) -> complex:
    """``exp(x)`` with the real part clamped to avoid overflow.

    Clamping preserves Newton ratios ``F/F'`` asymptotically: when the
    ``phi^M`` (or ``phi^{-M}``) term overflows it dominates both ``F`` and
    ``F'`` with the same prefactor.
    """
    if x.real > _LOG_HUGE:
        x = complex(_LOG_HUGE, x.imag)
    return cmath.exp(x)


def _pieces(p: ModelParams, phi: complex, d: complex):
    """P1, P2, R1, R2 and their phi-derivatives from the expanded forms."""
    A, K, M = p.A, p.K, float(p.M)
    e = K + A * d                 # A*phi - 1
    c = K + A * d * (phi + 1.0)   # A*phi^2 - 1
    S = d * e * c
    S1 = e * e * phi * phi - d * d
    P1 = K * S1 + (K * M + 1.0) * S
    P2 = phi * e ** 3 - A * A * d * d + M * e * A * A * d * d
    R1 = -A * A * S1
    w = M * d + phi
    R2 = A * d ** 3 + A * A * phi * e * e * w

    dS1 = 2.0 * A * e * phi * phi + 2.0 * phi * e * e - 2.0 * d
    dS = e * c + A * d * c + 2.0 * A * phi * d * e
    dP1 = K * dS1 + (K * M + 1.0) * dS
    dP2 = e ** 3 + 3.0 * A * phi * e * e - 2.0 * A * A * d + M * A * A * (A * d * d + 2.0 * e * d)
    dR1 = -A * A * dS1
    dR2 = 3.0 * A * d * d + A * A * (e * e * w + 2.0 * A * phi * e * w + phi * e * e * (M + 1.0))
    return (P1, P2, R1, R2), (dP1, dP2, dR1, dR2)


def _pieces_det(p: ModelParams, phi: complex, d: complex):
    """P1, P2, R1, R2 via the raw 2x2 determinants (cross-check route)."""
    A, K, M = p.A, p.K, float(p.M)
    e = K + A * d  # A*phi - 1
    G1 = phi * (-e) * (K * phi + (K * M + 1.0) * d)
    G2 = (-e) * (A * M * d + K * phi + A * phi * d)
    H1 = d * (K + (K * M + 1.0) * (-e))
    H2 = d * ((A + M * A * A * phi) * (-e) + K * A * phi)
    P1 = (-e) * G1 - d * H1
    P2 = A * H1 + (-e) * G2
    R1 = -A * H2 + A * A * phi * G2
    R2 = -d * H2 - A * A * phi * G1
    return P1, P2, R1, R2


def _log_abs(*vals) -> float:
    m = max(abs(v) for v in vals)
    return math.log(m) if m > 0 else -math.inf


def _F_terms(p: ModelParams, phi: complex, d: complex, full: bool):
    """Term coefficients and their log-magnitude exponents.

    The four terms of ``F`` are ``-P1``, ``phi^M P2``, ``A^{-M} R1`` and
    ``(A phi)^{-M} R2``; each is kept as a coefficient pair (value,
    derivative part) plus a real exponent, so huge ``|phi|^M`` factors are
    handled by a common exponent shift instead of overflowing.
    """
    M = p.M
    (P1, P2, R1, R2), (dP1, dP2, dR1, dR2) = _pieces(p, phi, d)
    logphi = _clog1p(d)
    log_am = -M * math.log(p.A)
    terms = [
        (-P1, -dP1, 0.0 + 0.0j),
        (P2, dP2 + M * P2 / phi, M * logphi),
    ]
    if full:
        terms.append((R1, dR1, complex(log_am)))
        terms.append((R2, dR2 - M * R2 / phi, log_am - M * logphi))
    exps = [e.real + _log_abs(v, dv) for v, dv, e in terms]
    return terms, exps


def _F_core(p: ModelParams, phi: complex, d: complex, full: bool):
    if phi == 0:
        raise ValueError("phi = 0 is a pole of F")
    terms, exps = _F_terms(p, phi, d, full)
    max_e = max(exps)
    shift = max(0.0, max_e - _LOG_HUGE)
    val = 0.0 + 0.0j
    der = 0.0 + 0.0j
    tail_kept = 0
    for i, ((v, dv, e), ei) in enumerate(zip(terms, exps)):
        if ei < max_e - 1500.0:  # cannot affect the sum in double precision
            continue
        if i >= 2:
            tail_kept += 1
        val += _exp_times(e - shift, v)
        der += _exp_times(e - shift, dv)
    return val, der, tail_kept == 0


def _exp_times(e: complex, v: complex) -> complex:
    """``exp(e) * v`` evaluated in log space so the product cannot overflow
    when ``exp(e)`` alone would."""
    if v == 0:
        return 0.0 + 0.0j
    if abs(e.real) < 300.0:
        return cmath.exp(e) * v
    return cmath.exp(e + cmath.log(v))


def F_scale(p: ModelParams, phi: complex, d: complex | None = None) -> float:
    """Magnitude of the dominant term of ``F`` (shift-consistent with
    :func:`F_of_phi`), for relative residual tests."""
    if d is None:
        d = phi - 1.0
    _, exps = _F_terms(p, phi, d, full=True)
    return math.exp(min(max(exps), _LOG_HUGE))


def F_of_phi(p: ModelParams, phi: complex, d: complex | None = None) -> CharfnValue:
    """Sorted-representation transfer determinant ``F`` and ``dF/dphi``.

    ``d`` may supply ``phi - 1`` at full precision when it is known exactly.
    When ``A^{-M}`` underflows below 1e-300 the tail is dropped
    (``tail_negligible`` is set) and ``F`` coincides with ``F0``.
    """
    if d is None:
        d = phi - 1.0
    val, der, dropped = _F_core(p, phi, d, full=True)
    return CharfnValue(value=val, derivative=der, which="F", tail_negligible=dropped)


def F0_of_phi(p: ModelParams, phi: complex, d: complex | None = None) -> CharfnValue:
    """Tail-free determinant ``F0 = -P1 + phi^M P2`` and its derivative."""
    if d is None:
        d = phi - 1.0
    val, der, _ = _F_core(p, phi, d, full=False)
    return CharfnValue(value=val, derivative=der, which="F0", tail_negligible=True)


def Q_of_z(z: complex, kappa: float) -> CharfnValue:
    """Limit function ``Q(z; kappa) = e^z (1 + z^2/kappa^2) - (1 + z)``.

    The derivative uses the identity ``dQ/dz = Q + z + e^z (2z/kappa^2)``.
    """
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    ez = cmath.exp(z)
    k2 = kappa * kappa
    val = ez * (1.0 + z * z / k2) - (1.0 + z)
    der = val + z + ez * (2.0 * z / k2)
    return CharfnValue(value=val, derivative=der, which="Q")


def Qeps_of_z(p: ModelParams, z: complex) -> CharfnValue:
    """Finite-M analog ``Q^eps(z) = K^{-3} F(1 + z/M)`` and its ``d/dz``.

    Converges to ``Q(z; kappa)`` as ``M -> infinity`` with
    ``kappa = K sqrt(M)`` fixed.
    """
    d = z / p.M
    if 1.0 + d == 0:
        raise ValueError("z = -M is a pole of the scaled map")
    f = F_of_phi(p, 1.0 + d, d=d)
    scale = p.K ** 3
    return CharfnValue(
        value=f.value / scale,
        derivative=f.derivative / (scale * p.M),
        which="Qeps",
        tail_negligible=f.tail_negligible,
    )


def lambda_of_z(p: ModelParams, z: complex) -> complex:
    """Eigenvalue map in the scaled variable: ``K z / M + (z^2/M^2)/(1 + z/M)``."""
    M = p.M
    if 1.0 + z / M == 0:
        raise ValueError("z = -M is a pole of the eigenvalue map")
    return p.K * z / M + (z * z / (M * M)) / (1.0 + z / M)


def Lambda_of_z(p: ModelParams, z: complex) -> complex:
    """Rescaled eigenvalue ``M lambda / K = z + z^2 / (K (M + z))``; O(1) at crossings."""
    return z + z * z / (p.K * (p.M + z))
