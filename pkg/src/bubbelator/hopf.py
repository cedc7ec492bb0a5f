"""Location of the critical atomization rates where eigenvalue pairs cross.

For each branch index ``j`` there is a critical ``kappa_j(M)`` at which a
conjugate eigenvalue pair of the linearization sits exactly on the imaginary
axis.  The crossing is found by a damped Newton iteration on the three real
unknowns ``(Re z, Im z, K)`` with residuals

    Re G = Im G = 0,   Re Lambda = 0,

where ``G(z) = K^{-3} F(1 + z/M)`` is the scaled characteristic function and
``Lambda = M lambda / K`` the rescaled eigenvalue.  Working in ``z = M(phi-1)``
keeps every residual O(1) all the way to ``M = 10^6``, where ``phi - 1`` itself
would be at the edge of double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import charfn, roots
from .model import ModelParams

__all__ = [
    "HopfPoint",
    "LambdaBranch",
    "find_hopf",
    "table1",
    "format_table1_csv",
    "format_table1_text",
    "lambda_branch",
    "unstable_window_check",
]


@dataclass(frozen=True)
class HopfPoint:
    """A crossing of a conjugate eigenvalue pair through the imaginary axis."""

    M: int
    j: int
    K: float
    kappa: float
    omega: float
    z: complex
    lam: complex
    residual_F: float
    residual_ReLambda: float


@dataclass
class LambdaBranch:
    """One eigenvalue branch ``lambda_j(kappa)`` at fixed ``M``.

    ``samples`` is a list of ``(kappa, lambda)``; the monotonicity flags refer
    to finite differences of ``Re lambda`` and ``Im lambda`` restricted to
    ``kappa >= kappa_j(M)``.
    """

    M: int
    j: int
    samples: list
    re_increasing_past_crossing: bool
    im_increasing_past_crossing: bool


def _residual(M: int, x: np.ndarray):
    """Residual vector [Re G, Im G, Re Lambda] at x = (Re z, Im z, K)."""
    z = complex(x[0], x[1])
    K = float(x[2])
    if not (K > 0.0) or not (x[1] > 0.0) or not np.all(np.isfinite(x)):
        return None
    p = ModelParams(M, K)
    q = charfn.Qeps_of_z(p, z)
    lam_scaled = charfn.Lambda_of_z(p, z)
    return np.array([q.value.real, q.value.imag, lam_scaled.real])


def _newton3(M: int, x0: np.ndarray, tol: float = 1e-12, max_iter: int = 80):
    """Damped Newton on the 3-real-unknown crossing system."""
    x = np.array(x0, dtype=float)
    r = _residual(M, x)
    if r is None:
        return x, math.inf, False
    norm = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        J = np.empty((3, 3))
        for i in range(3):
            h = 1e-7 * (1.0 + abs(x[i]))
            xp = x.copy()
            xp[i] += h
            rp = _residual(M, xp)
            if rp is None:
                return x, norm, False
            J[:, i] = (rp - r) / h
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            return x, norm, False
        factor = 1.0
        for _ in range(25):
            x_new = x - factor * step
            r_new = _residual(M, x_new)
            if r_new is not None and float(np.max(np.abs(r_new))) < norm:
                break
            factor *= 0.5
        else:
            return x, norm, norm <= tol
        x, r = x_new, r_new
        norm = float(np.max(np.abs(r)))
        if norm <= tol and float(np.max(np.abs(step))) * factor <= 1e-9 * (1.0 + float(np.max(np.abs(x)))):
            return x, norm, True
    return x, norm, norm <= tol


def _point_from_solution(M: int, j: int, x: np.ndarray) -> HopfPoint:
    z = complex(x[0], x[1])
    K = float(x[2])
    p = ModelParams(M, K)
    lam = charfn.lambda_of_z(p, z)
    phi = 1.0 + z / M
    v = charfn.F_of_phi(p, phi, d=z / M)
    scale = roots._F_scale(p, phi)
    if not (abs(v.derivative) > 1e-6 * scale):
        raise RuntimeError(f"crossing at M={M}, j={j} is not a simple root")
    if min(abs(phi - s) for s in roots._spurious_points(p)) <= 1e-9:
        raise RuntimeError(f"Newton converged to a spurious root at M={M}, j={j}")
    return HopfPoint(
        M=M, j=j, K=K, kappa=K * math.sqrt(M), omega=lam.imag, z=z, lam=lam,
        residual_F=abs(v.value) / scale,
        residual_ReLambda=abs(lam.real) / abs(lam),
    )


def find_hopf(M: int, j: int = 1, seed=None) -> HopfPoint:
    """Crossing point of the ``j``-th eigenvalue branch at system size ``M``.

    Seeded from the large-M limit (``z = i t_j``, ``kappa = kappa_j^0``)
    unless ``seed = (z, K)`` is given; falls back to continuation in ``M``
    from a larger system when the asymptotic seed is too far off (small M).
    """
    if M < 25:
        raise ValueError("M must be >= 25")
    if j < 1:
        raise ValueError("j must be >= 1")
    t_j = roots.tan_eq_t_roots(j)[-1]
    k0 = roots.kappa_j0(j)

    if seed is not None:
        z0, K0 = complex(seed[0]), float(seed[1])
        x, norm, ok = _newton3(M, np.array([z0.real, z0.imag, K0]))
        if not ok:
            raise RuntimeError(
                f"crossing search failed at M={M}, j={j}: residual {norm:.3g} at x={x}"
            )
        return _point_from_solution(M, j, x)

    x, norm, ok = _newton3(M, np.array([0.0, t_j, k0 / math.sqrt(M)]))
    if ok:
        return _point_from_solution(M, j, x)

    # continuation fallback: solve at a ladder of larger M, stepping down
    ladder = [M]
    while ladder[-1] < 10 ** 6:
        ladder.append(ladder[-1] * 4)
    z, kappa = 1j * t_j, k0
    last_err = norm
    for Mi in reversed(ladder):
        x, norm, ok = _newton3(Mi, np.array([z.real, z.imag, kappa / math.sqrt(Mi)]))
        if not ok:
            raise RuntimeError(
                f"crossing continuation failed at M={Mi} (target {M}), j={j}: "
                f"residual {norm:.3g}, direct-attempt residual {last_err:.3g}"
            )
        z, kappa = complex(x[0], x[1]), x[2] * math.sqrt(Mi)
    return _point_from_solution(M, j, x)


_TABLE1_M = (100, 1000, 10000, 100000, 1000000)


def table1(M_list=_TABLE1_M) -> list:
    """First-crossing rows ``(M, K, kappa, omega)`` for each system size.

    Returns a list of ``(M, HopfPoint or None, error message or None)``;
    failures are recorded per row rather than raised.
    """
    out = []
    for M in M_list:
        try:
            out.append((int(M), find_hopf(int(M), 1), None))
        except Exception as exc:  # per-row propagation into the table
            out.append((int(M), None, str(exc)))
    return out


def format_table1_csv(rows) -> str:
    lines = ["M,K,kappa,omega,residual_F,residual_ReLambda"]
    for M, hp, err in rows:
        if hp is None:
            lines.append(f"{M},,,,,error: {err}")
        else:
            lines.append(
                f"{M},{hp.K:.17g},{hp.kappa:.17g},{hp.omega:.17g},"
                f"{hp.residual_F:.17g},{hp.residual_ReLambda:.17g}"
            )
    return "\n".join(lines) + "\n"


def format_table1_text(rows) -> str:
    lines = [f"{'M':>9}  {'K':>12}  {'kappa':>10}  {'omega':>12}"]
    for M, hp, err in rows:
        if hp is None:
            lines.append(f"{M:>9}  error: {err}")
        else:
            lines.append(f"{M:>9}  {hp.K:>12.6g}  {hp.kappa:>10.6g}  {hp.omega:>12.6g}")
    return "\n".join(lines) + "\n"


def lambda_branch(M: int, j: int, kappa_grid) -> LambdaBranch:
    """Continuation of the ``j``-th eigenvalue branch over a kappa grid.

    Anchored at the crossing from :func:`find_hopf` and marched outward in
    both directions with a linear predictor in kappa and a Newton corrector
    on the scaled characteristic function.
    """
    grid = sorted(float(k) for k in kappa_grid)
    if not grid or grid[0] < 0.5:
        raise ValueError("kappa grid must lie within [0.5, kappa_max]")
    hp = find_hopf(M, j)

    def correct(z_pred, kappa):
        p = ModelParams.from_kappa(M, kappa)

        def f(z):
            v = charfn.Qeps_of_z(p, z)
            return v.value, v.derivative

        z_new, _, ok = roots.newton_complex(f, z_pred)
        return z_new, ok, p

    def march(targets):
        res = []
        z, kappa = hp.z, hp.kappa
        z_prev, k_prev = z, kappa
        for kt in targets:
            dk = kt - kappa
            slope = (z - z_prev) / (kappa - k_prev) if kappa != k_prev else 0.0
            z_pred = z + slope * dk
            z_new, ok, p = correct(z_pred, kt)
            if not ok or z_new.imag <= 0:
                raise RuntimeError(f"branch continuation failed at kappa={kt:.6g}")
            pred_step = abs(z_pred - z) + 1e-12
            if abs(z_new - z_pred) > 10.0 * max(pred_step, abs(dk)):
                raise RuntimeError(f"branch jump detected at kappa={kt:.6g}")
            z_prev, k_prev = z, kappa
            z, kappa = z_new, kt
            res.append((kt, charfn.lambda_of_z(p, z)))
        return res

    above = march([k for k in grid if k >= hp.kappa])
    below = march(list(reversed([k for k in grid if k < hp.kappa])))
    samples = sorted(below + above, key=lambda s: s[0])

    past = [lam for k, lam in samples if k >= hp.kappa]
    re_inc = all(b.real > a.real for a, b in zip(past, past[1:]))
    im_inc = all(b.imag > a.imag for a, b in zip(past, past[1:]))
    return LambdaBranch(M=M, j=j, samples=samples,
                        re_increasing_past_crossing=re_inc,
                        im_increasing_past_crossing=im_inc)


def unstable_window_check(M: int, kappa_probes) -> list:
    """Unstable-pair counts at each probe kappa; must be nondecreasing."""
    probes = list(kappa_probes)
    if probes != sorted(probes):
        raise ValueError("kappa probes must be sorted")
    out = []
    for kappa in probes:
        p = ModelParams.from_kappa(M, float(kappa))
        out.append((float(kappa), roots.count_unstable_pairs(p)))
    counts = [c for _, c in out]
    if any(b < a for a, b in zip(counts, counts[1:])):
        raise RuntimeError(f"unstable-pair counts not nondecreasing in kappa: {counts}")
    return out
