"""Linearization at the constant equilibrium and a brute-force spectral oracle.

The Jacobian of the model at the constant equilibrium ``nbar_ell = A = 1+K``
is an ``M x M`` matrix ``B`` with first row
``(-A(M+2), 1-K, -K, ..., -K, MK+1)``, a tridiagonal interior
``(A, -A-1, 1)``, and last row carrying ``A`` in columns 1 and ``N`` and
``-A`` on the diagonal.  The row vector ``(1, 2, ..., M)`` is an exact left
null vector (mass conservation) and ``vbar_ell = 1 + (A^ell - A)/(K A^N)``
spans the kernel.

The spectral oracle here computes the characteristic polynomial exactly
(integer Faddeev-LeVerrier on a power-of-two rescaling of ``B``) and finds
all roots by companion-matrix iteration seeded into an extended-precision
Newton polish against the exact coefficients.  It is deliberately restricted to small ``M``; the scalable
route is the characteristic-function reduction in :mod:`bubbelator.roots`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .model import ModelParams, StateVector, rhs

__all__ = [
    "LinearizationMatrix",
    "SpectrumResult",
    "assemble_B",
    "right_null_vector",
    "left_null_vector",
    "jacobian_fd",
    "charpoly_coefficients",
    "charpoly_oracle_spectrum",
    "check_lambda0_simple",
]

_ORACLE_M_MAX = 30


@dataclass(frozen=True)
class LinearizationMatrix:
    """Dense linearization matrix together with its parameters."""

    entries: np.ndarray
    params: ModelParams

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)


@dataclass
class SpectrumResult:
    """Eigenvalues with optional root provenance and a stability tally.

    ``records`` entries are ``(lam, phi, simple)`` where ``phi`` is the
    characteristic-function root that produced ``lam`` (``None`` for
    eigenvalues obtained without one) and ``simple`` flags algebraic
    simplicity where it could be established.
    """

    eigenvalues: np.ndarray
    records: list = field(default_factory=list)

    def __post_init__(self):
        lams = np.asarray(self.eigenvalues, dtype=complex)
        order = np.lexsort((lams.imag, lams.real))
        self.eigenvalues = lams[order]

    @property
    def n_zero(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) <= 1e-9))

    @property
    def n_real_negative(self) -> int:
        lam = self.eigenvalues
        return int(np.sum((np.abs(lam.imag) <= 1e-9) & (lam.real < -1e-9)))

    @property
    def n_unstable_pairs(self) -> int:
        lam = self.eigenvalues
        return int(np.sum((lam.imag > 1e-12) & (lam.real > 1e-12)))

    @property
    def n_conjugate_pairs(self) -> int:
        return int(np.sum(self.eigenvalues.imag > 1e-9))

    def unstable(self) -> np.ndarray:
        """Unstable eigenvalues in the upper half plane."""
        lam = self.eigenvalues
        return lam[(lam.imag > 1e-12) & (lam.real > 1e-12)]


def assemble_B(p: ModelParams) -> LinearizationMatrix:
    """Jacobian of the model at the constant equilibrium ``nbar = A``."""
    M, K, A = p.M, p.K, p.A
    B = np.zeros((M, M))
    B[0, 0] = -A * (M + 2)
    B[0, 1] = 1.0 - K
    B[0, 2 : M - 1] = -K
    B[0, M - 1] = M * K + 1.0
    for i in range(1, M - 1):
        B[i, i - 1] = A
        B[i, i] = -A - 1.0
        B[i, i + 1] = 1.0
    B[M - 1, 0] = A
    B[M - 1, M - 2] += A
    B[M - 1, M - 1] = -A
    return LinearizationMatrix(entries=B, params=p)


def left_null_vector(p: ModelParams) -> np.ndarray:
    """The mass row vector ``(1, 2, ..., M)`` annihilating ``B`` on the left."""
    return np.arange(1, p.M + 1, dtype=float)


def right_null_vector(p: ModelParams) -> np.ndarray:
    """Kernel vector ``vbar_ell = 1 + (A^ell - A) / (K A^N)``.

    Evaluated as ``1 + (A^{ell-N} - A^{1-N}) / K`` to avoid overflow of
    ``A^N`` for large ``M``.
    """
    logA = math.log(p.A)
    ells = np.arange(1, p.M + 1, dtype=float)
    return 1.0 + (np.exp((ells - p.N) * logA) - math.exp((1.0 - p.N) * logA)) / p.K


def jacobian_fd(p: ModelParams, s: StateVector, h: float = 1e-5) -> np.ndarray:
    """Centered finite-difference Jacobian of the model right-hand side.

    The right-hand side is quadratic, so centered differences are exact up to
    roundoff; this serves as an independent oracle for :func:`assemble_B`.
    """
    if not (h > 0):
        raise ValueError("step h must be positive")
    M = p.M
    J = np.empty((M, M))
    base = np.array(s.n)
    for i in range(M):
        plus = base.copy()
        plus[i] += h
        minus = base.copy()
        minus[i] -= h
        J[:, i] = (rhs(p, StateVector(plus, s.t)) - rhs(p, StateVector(minus, s.t))) / (2.0 * h)
    return J


def _integer_rescale(B: np.ndarray):
    """Return integer matrix ``Bi`` and shift ``s`` with ``B = Bi / 2**s``."""
    shift = 0
    for x in B.flat:
        _, den = float(x).as_integer_ratio()
        shift = max(shift, den.bit_length() - 1)
    scale = 1 << shift
    Bi = [[int(Fraction(float(x)) * scale) for x in row] for row in B]
    return Bi, shift


def charpoly_coefficients(B: LinearizationMatrix) -> list:
    """Exact characteristic polynomial coefficients of ``B``, highest first.

    Faddeev-LeVerrier recurrence over integers (after a power-of-two
    rescaling that makes every float entry exact), so the returned
    ``Fraction`` coefficients are exact for the stored matrix.
    """
    M = B.params.M
    if M > _ORACLE_M_MAX:
        raise ValueError(f"characteristic-polynomial oracle is limited to M <= {_ORACLE_M_MAX}")
    Bi, shift = _integer_rescale(B.entries)
    n = M
    Mk = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]
    for k in range(1, n + 1):
        BM = [[sum(Bi[i][r] * Mk[r][j] for r in range(n)) for j in range(n)] for i in range(n)]
        tr = sum(BM[i][i] for i in range(n))
        assert tr % k == 0, "Faddeev-LeVerrier trace division must be exact over the integers"
        c = -tr // k
        coeffs.append(Fraction(c, 1 << (shift * k)))
        Mk = BM
        for i in range(n):
            Mk[i][i] += c
    return coeffs


def _polish_mpmath(coeffs: list, roots: np.ndarray, dps: int = 60) -> np.ndarray:
    """Newton-polish double-precision roots against the exact polynomial."""
    with mpmath.workdps(dps):
        cs = [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) for c in coeffs]
        dcs = [c * (len(cs) - 1 - i) for i, c in enumerate(cs[:-1])]
        out = []
        for r in roots:
            z = mpmath.mpc(r)
            for _ in range(40):
                pz = mpmath.polyval(cs, z)
                dpz = mpmath.polyval(dcs, z)
                if dpz == 0:
                    break
                step = pz / dpz
                z = z - step
                if abs(step) <= mpmath.mpf(10) ** (-dps + 12) * (1 + abs(z)):
                    break
            out.append(complex(z))
    return np.array(out, dtype=complex)


def charpoly_oracle_spectrum(B: LinearizationMatrix) -> SpectrumResult:
    """All ``M`` eigenvalues of ``B`` from its exact characteristic polynomial.

    Guarded to ``M <= 30``: the recurrence is exact but the root-finding
    problem conditions poorly for large degree.  Exact zero roots (the mass
    eigenvalue) are deflated before iteration.
    """
    coeffs = charpoly_coefficients(B)
    n_zero = 0
    while coeffs[-1] == 0:
        coeffs = coeffs[:-1]
        n_zero += 1
    roots = np.roots(np.array([float(c) for c in coeffs]))
    roots = _polish_mpmath(coeffs, roots)
    lams = np.concatenate([roots, np.zeros(n_zero, dtype=complex)])
    records = [(lam, None, None) for lam in lams]
    return SpectrumResult(eigenvalues=lams, records=records)


def check_lambda0_simple(B: LinearizationMatrix, tol_factor: float = 1e-10) -> bool:
    """True iff ``lambda = 0`` is a simple eigenvalue of ``B``.

    Checks numerical rank ``M - 1`` via SVD and the absence of a generalized
    eigenvector via ``(1,...,M) . vbar != 0``.
    """
    p = B.params
    svals = np.linalg.svd(B.entries, compute_uv=False)
    tol = tol_factor * np.linalg.norm(B.entries, np.inf)
    rank = int(np.sum(svals > tol))
    if rank != p.M - 1:
        return False
    return abs(left_null_vector(p) @ right_null_vector(p)) > tol
