"""Root finding for the characteristic functions.

Covers the transcendental equation ``tan t = t`` (instability onsets of the
limit function ``Q``), continuation of the ``Q``-root curves in ``kappa``,
and recovery of the full spectrum of the linearization by Newton iteration
on ``F`` from seeds spread over the unit circle and near ``phi = 1``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import charfn
from .linalg import SpectrumResult
from .model import ModelParams

__all__ = [
    "RootRecord",
    "QRootCurve",
    "tan_eq_t_roots",
    "kappa_j0",
    "q_root_curve",
    "spectrum_via_F",
    "count_unstable_pairs",
    "eigenvector_for_phi",
    "count_zeros_argument_principle",
    "newton_complex",
]


@dataclass(frozen=True)
class RootRecord:
    """One root of ``F`` with residual and classification flags."""

    phi: complex
    lam: complex
    residual: float
    simple: bool
    spurious: bool


@dataclass
class QRootCurve:
    """Samples of one root curve ``z_j(kappa)`` of the limit function ``Q``."""

    j: int
    t_j: float
    kappa0: float
    samples: list  # list of (kappa, z) sorted by kappa


# ---------------------------------------------------------------------------
# generic damped Newton for analytic scalar functions


def newton_complex(f, z0: complex, tol: float = 1e-13, max_iter: int = 100,
                   max_halvings: int = 20, max_step_frac: float = 0.5):
    """Damped Newton iteration on an analytic ``f(z) -> (value, derivative)``.

    Returns ``(z, |f(z)|, converged)``.  Steps are halved (up to
    ``max_halvings`` times) whenever ``|f|`` fails to decrease, and capped at
    ``max_step_frac * (1 + |z|)`` so the iteration stays in the basin of the
    nearest root instead of shooting across the plane.
    """
    z = complex(z0)
    val, der = f(z)
    fz = abs(val)
    for _ in range(max_iter):
        if der == 0 or not np.isfinite(abs(der)):
            return z, fz, False
        step = val / der
        cap = max_step_frac * (1.0 + abs(z))
        if abs(step) > cap:
            step *= cap / abs(step)
        factor = 1.0
        for _ in range(max_halvings):
            z_new = z - factor * step
            val_new, der_new = f(z_new)
            if abs(val_new) < fz or not np.isfinite(fz):
                break
            factor *= 0.5
        else:
            return z, fz, fz <= tol
        z, val, der, fz = z_new, val_new, der_new, abs(val_new)
        if abs(step) * factor <= 1e-16 * (1.0 + abs(z)) and fz <= tol:
            return z, fz, True
    return z, fz, fz <= tol


# ---------------------------------------------------------------------------
# roots of tan t = t (with cos t < 0) and the critical kappa values


def tan_eq_t_roots(k_max: int) -> list:
    """First ``k_max`` positive roots of ``tan t = t`` with ``cos t < 0``.

    The j-th root lies in ``(pi + 2 pi (j-1), 3 pi/2 + 2 pi (j-1))`` and
    approaches the right endpoint from below as ``j`` grows.  Solved via
    ``g(t) = sin t - t cos t`` (bisection bracket, Newton refinement).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")

    def g(t):
        return math.sin(t) - t * math.cos(t)

    out = []
    for j in range(1, k_max + 1):
        lo = math.pi + 2.0 * math.pi * (j - 1) + 1e-9
        hi = 1.5 * math.pi + 2.0 * math.pi * (j - 1) - 1e-12
        t = brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16)
        for _ in range(4):
            gt = g(t)
            if abs(gt) <= 1e-13:
                break
            t -= gt / (t * math.sin(t))
        out.append(t)
    return out


def kappa_j0(j: int) -> float:
    """Limiting crossing value ``kappa_j^0 = (sqrt(1 + t_j^2) - 1)^{1/2}``."""
    t = tan_eq_t_roots(j)[-1]
    return math.sqrt(math.sqrt(1.0 + t * t) - 1.0)


def _dz_dw(z: complex, w: float) -> complex:
    """Derivative of a Q-root in ``w = kappa^2`` along the curve."""
    return (z / w) / (2.0 + (w + z * z) / (1.0 + z))


def _newton_on_Q(z0: complex, kappa: float):
    def f(z):
        v = charfn.Q_of_z(z, kappa)
        return v.value, v.derivative

    return newton_complex(f, z0)


def q_root_curve(j: int, kappa_grid) -> QRootCurve:
    """Continue the root curve ``z_j(kappa)`` of ``Q`` over a kappa grid.

    Starts from the exact anchor ``z = i t_j`` at ``kappa = kappa_j^0`` and
    marches in both directions with an Euler predictor in ``w = kappa^2``
    and a Newton corrector on ``Q``.
    """
    grid = sorted(float(k) for k in kappa_grid)
    if grid and grid[0] <= 0:
        raise ValueError("kappa grid must be positive")
    t_j = tan_eq_t_roots(j)[-1]
    k0 = kappa_j0(j)
    z0 = 1j * t_j

    def march(targets):
        res = []
        z, k = z0, k0
        for kt in targets:
            w, wt = k * k, kt * kt
            n_sub = max(1, int(math.ceil(abs(wt - w) / 0.25)))
            for i in range(1, n_sub + 1):
                w_next = w + (wt - w) * i / n_sub
                z_pred = z + _dz_dw(z, w + (wt - w) * (i - 1) / n_sub) * (wt - w) / n_sub
                z_new, res_abs, ok = _newton_on_Q(z_pred, math.sqrt(w_next))
                if not ok or z_new.imag <= 0:
                    raise RuntimeError(
                        f"Q-root continuation failed near kappa={math.sqrt(w_next):.6g} "
                        f"(last good kappa={k:.6g}, z={z:.6g})"
                    )
                z = z_new
            k = kt
            res.append((k, z))
        return res

    above = march([k for k in grid if k >= k0])
    below = march(list(reversed([k for k in grid if k < k0])))
    samples = sorted(below + above, key=lambda s: s[0])
    return QRootCurve(j=j, t_j=t_j, kappa0=k0, samples=samples)


# ---------------------------------------------------------------------------
# full spectrum via F


def _spurious_points(p: ModelParams):
    A = p.A
    return (1.0, 1.0 / A, A ** -0.5, -(A ** -0.5))


def _accept_root(p: ModelParams, v, phi: complex, rel_tol: float) -> bool:
    """Converged-root test: small residual relative to the dominant term of F,
    or small backward error in phi (the Newton step |F/F'|).

    The second clause matters for far roots (|phi| >> 1): the |phi|^M factor
    amplifies the roundoff floor of the polynomial pieces far above
    ``rel_tol * scale`` even when the root itself is accurate to ~1e-15.
    """
    if abs(v.value) <= rel_tol * _F_scale(p, phi):
        return True
    return abs(v.value) <= 1e-12 * (1.0 + abs(phi)) * abs(v.derivative)


def _newton_on_F(p: ModelParams, z0: complex):
    def f(phi):
        v = charfn.F_of_phi(p, phi)
        return v.value, v.derivative

    return newton_complex(f, z0)


def _F_scale(p: ModelParams, phi: complex) -> float:
    """Magnitude of the dominant term of F at phi (for relative residuals)."""
    return max(charfn.F_scale(p, phi), 1e-300)


def _quartic_factor_roots(p: ModelParams) -> list:
    """Roots of the quartic polynomial factor that carries the far spectrum.

    The polynomial part of ``phi^{-M} F`` that dominates for large ``|phi|``
    is ``phi (A phi - 1)^3 - A^2 (phi - 1)^2 + M A^2 (A phi - 1)(phi - 1)^2``;
    its large roots seed the eigenvalues far from the unit circle (e.g. the
    strongly damped real mode near ``phi = -M``).
    """
    A, M = p.A, float(p.M)
    e = np.poly1d([A, -1.0])
    d = np.poly1d([1.0, -1.0])
    P2 = np.poly1d([1.0, 0.0]) * e ** 3 - A * A * d ** 2 + M * A * A * e * d ** 2
    return [complex(r) for r in np.roots(P2.coeffs)]


def _default_seeds(p: ModelParams):
    M = p.M
    ks = np.arange(M)
    unit = np.exp(2j * np.pi * ks / M)
    ks2 = np.arange(2 * M)
    unit2 = np.exp(2j * np.pi * ks2 / (2 * M))
    seeds = list(unit2)
    seeds += list(unit2 * (1.0 + 2.0 / M))
    # interior rings: real eigenvalues sit on |phi| = A^{-1/2}, where the
    # partner root coincides with the complex conjugate
    b = p.A ** -0.5
    seeds += list(b * np.exp(2j * np.pi * (ks + 0.5) / M))
    seeds += list(math.sqrt(b) * unit)
    # near-1 cluster: ring plus imaginary-axis anchors of the limit function
    for r in (2.0, 6.0, 10.0):
        for th in np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False):
            seeds.append(1.0 + (r / M) * cmath.exp(1j * th))
    for t in tan_eq_t_roots(6):
        seeds.append(1.0 + 1j * t / M)
        seeds.append(1.0 - 1j * t / M)
    # far roots (e.g. the large negative real eigenvalue near phi = -M)
    seeds += [r for r in _quartic_factor_roots(p) if abs(r) > 1.5]
    return seeds


def spectrum_via_F(p: ModelParams, rel_tol: float = 1e-9, max_retries: int = 2) -> SpectrumResult:
    """All ``M`` eigenvalues of the linearization via Newton iteration on ``F``.

    Converged roots are deduplicated, the four spurious zeros of the factor
    ``S`` are removed, mirror roots are mapped through ``phi -> 1/(A phi)``
    onto the annulus-side representative, and ``lambda = 0`` (the exactly
    known double root at ``phi = 1``) is injected analytically.
    """
    M, A = p.M, p.A
    cluster_tol = 1e-7
    boundary = A ** -0.5
    seeds = _default_seeds(p)

    for attempt in range(max_retries + 1):
        found = []
        for s in seeds:
            # convergence is judged on the residual relative to the dominant
            # term of F, not on newton_complex's absolute tolerance
            phi, _, _ = _newton_on_F(p, s)
            v = charfn.F_of_phi(p, phi)
            if _accept_root(p, v, phi, rel_tol):
                found.append(phi)

        # map mirror-side roots onto their annulus-side partners
        promoted = []
        for phi in found:
            if abs(phi) < boundary and min(abs(phi - s) for s in _spurious_points(p)) > cluster_tol:
                partner, _, _ = _newton_on_F(p, 1.0 / (A * phi))
                v = charfn.F_of_phi(p, partner)
                if _accept_root(p, v, partner, rel_tol):
                    promoted.append(partner)
        found += promoted

        # deduplicate in phi
        roots = []
        for phi in sorted(found, key=lambda x: (x.real, x.imag)):
            if all(abs(phi - r) > cluster_tol * (1.0 + abs(r)) for r in roots):
                roots.append(phi)

        records = [RootRecord(phi=1.0 + 0j, lam=0.0 + 0j, residual=0.0, simple=True, spurious=False)]
        lams = [0.0 + 0j]
        for phi in roots:
            spurious = min(abs(phi - s) for s in _spurious_points(p)) <= cluster_tol
            if spurious or abs(phi) < boundary * (1.0 - 1e-9):
                continue
            v = charfn.F_of_phi(p, phi)
            scale = _F_scale(p, phi)
            lam = charfn.lambda_of_phi(p, phi)
            simple = abs(v.derivative) > 1e-6 * scale
            if any(abs(lam - l0) <= cluster_tol * (1.0 + abs(l0)) for l0 in lams):
                continue
            records.append(RootRecord(phi=phi, lam=lam, residual=abs(v.value) / scale,
                                      simple=simple, spurious=False))
            lams.append(lam)

        # degenerate candidates at phi = +-A^{-1/2}: eigenvalues only if F = F' = 0
        for sgn in (1.0, -1.0):
            phi_s = sgn * boundary
            v = charfn.F_of_phi(p, phi_s)
            scale = _F_scale(p, phi_s)
            if abs(v.value) <= rel_tol * scale and abs(v.derivative) <= 1e-6 * scale:
                lam = charfn.lambda_of_phi(p, phi_s)
                records.append(RootRecord(phi=phi_s, lam=lam, residual=abs(v.value) / scale,
                                          simple=False, spurious=False))
                lams.append(lam)

        # enforce closure under conjugation
        for rec in list(records):
            lam = rec.lam
            if abs(lam.imag) > 1e-12:
                conj = lam.conjugate()
                if all(abs(conj - l0) > cluster_tol * (1.0 + abs(l0)) for l0 in lams):
                    records.append(RootRecord(phi=rec.phi.conjugate(), lam=conj,
                                              residual=rec.residual, simple=rec.simple,
                                              spurious=False))
                    lams.append(conj)

        if len(lams) == M:
            break
        # retry with deterministically perturbed seeds
        rng = np.random.default_rng(1234 + attempt)
        seeds = _default_seeds(p) + [
            s * (1.0 + 1e-3 * cmath.exp(2j * np.pi * rng.random())) for s in _default_seeds(p)
        ]
    else:
        warnings.warn(
            f"spectrum_via_F recovered {len(lams)} of {M} eigenvalues", RuntimeWarning
        )

    records.sort(key=lambda r: (r.lam.real, r.lam.imag))
    return SpectrumResult(
        eigenvalues=np.array([r.lam for r in records], dtype=complex),
        records=[(r.lam, r.phi, r.simple) for r in records],
    )


def count_unstable_pairs(p: ModelParams) -> int:
    """Number of complex-conjugate eigenvalue pairs with ``Re lambda > 0``."""
    return spectrum_via_F(p).n_unstable_pairs


def eigenvector_for_phi(p: ModelParams, phi: complex) -> np.ndarray:
    """Eigenvector ``V_ell = c1 phi^(M-ell) + c2 (1/(A phi))^(M-ell)``.

    Coefficients ``(c1, c2) = (f(phi2), -f(phi1))`` with
    ``f(phi) = A phi^(M-1) + 1 - 1/phi``; normalized to unit sup-norm.
    """
    M, A = p.M, p.A
    phi2 = 1.0 / (A * phi)

    def f(x):
        return A * x ** (M - 1) + 1.0 - 1.0 / x

    c1, c2 = f(phi2), -f(phi)
    ells = np.arange(1, M + 1)
    V = c1 * phi ** (M - ells) + c2 * phi2 ** (M - ells)
    return V / np.max(np.abs(V))


# ---------------------------------------------------------------------------
# argument-principle zero counting


def count_zeros_argument_principle(f, contour, max_depth: int = 40) -> int:
    """Winding number of ``f`` along a closed polyline contour.

    ``contour`` is a sequence of complex points (closed implicitly).  Segments
    are bisected until the phase change of ``f`` per segment is below pi/2,
    so the total change of argument is tracked unambiguously.
    """
    pts = [complex(z) for z in contour]

    def dphase(z1, z2, f1, f2, depth):
        d = cmath.phase(f2 / f1)
        if abs(d) < 0.5 * math.pi or depth >= max_depth:
            return d
        zm = 0.5 * (z1 + z2)
        fm = f(zm)
        return dphase(z1, zm, f1, fm, depth + 1) + dphase(zm, z2, fm, f2, depth + 1)

    total = 0.0
    vals = [f(z) for z in pts]
    n = len(pts)
    for i in range(n):
        z1, z2 = pts[i], pts[(i + 1) % n]
        total += dphase(z1, z2, vals[i], vals[(i + 1) % n], 0)
    return int(round(total / (2.0 * math.pi)))
