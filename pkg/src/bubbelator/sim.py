"""Time integration of the nonlinear cluster model.

An explicit adaptive Dormand-Prince 4(5) pair with PI-free elementary step
control.  The interesting regimes (moderate M, K of order one) are only
mildly stiff; a step-collapse safeguard raises ``StiffnessError`` instead of
grinding when that assumption fails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import roots
from .model import ModelParams, StateVector, rhs, total_mass

__all__ = [
    "Trajectory",
    "StiffnessError",
    "BlowUpError",
    "integrate",
    "oscillation_metrics",
    "perturbed_equilibrium",
    "trajectory_csv",
]


class StiffnessError(RuntimeError):
    """Step size collapsed; the problem is too stiff for the explicit pair."""


class BlowUpError(RuntimeError):
    """State became non-finite; carries the last good time in ``t_last``."""

    def __init__(self, t_last: float):
        super().__init__(f"solution blew up; last good time t={t_last:.6g}")
        self.t_last = t_last


@dataclass
class Trajectory:
    """Integration output: dense monomer history plus sparse full snapshots."""

    params: ModelParams
    times: np.ndarray                 # per accepted step
    n1: np.ndarray                    # monomer density per accepted step
    mass_drift: np.ndarray            # relative mass deviation per accepted step
    snapshot_times: np.ndarray
    snapshots: list                   # StateVector at snapshot_times
    step_stats: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        """True if every stored snapshot stayed strictly positive."""
        return all(np.all(s.n > 0.0) for s in self.snapshots)


# Dormand-Prince 4(5) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def integrate(p: ModelParams, s0: StateVector, t_end: float, *,
              atol: float = 1e-10, rtol: float = 1e-8,
              snapshot_stride: int = 100, fixed_step: float | None = None) -> Trajectory:
    """Integrate the model from ``s0`` to ``t_end``.

    Adaptive by default; ``fixed_step`` disables step control (used by the
    order-verification test).  Snapshots of the full state are stored every
    ``snapshot_stride`` accepted steps (and at both endpoints); the monomer
    density and the relative mass drift are stored at every accepted step.
    """
    if not (t_end > 0):
        raise ValueError("t_end must be positive")
    y = np.array(s0.n, dtype=float)
    t = float(s0.t)
    t_stop = t + t_end
    mass0 = total_mass(p, s0)

    def f(ti, yi):
        if not np.all(np.isfinite(yi)):
            raise BlowUpError(t)
        # overflow here surfaces as a non-finite proposed state and becomes
        # a BlowUpError on the next stage, not a warning storm
        with np.errstate(over="ignore", invalid="ignore"):
            return rhs(p, StateVector(yi, ti))

    k1 = f(t, y)
    if fixed_step is not None:
        h = float(fixed_step)
    else:
        # standard starting-step heuristic from the error-per-step model
        scale = atol + rtol * np.abs(y)
        d0 = math.sqrt(float(np.mean((y / scale) ** 2)))
        d1 = math.sqrt(float(np.mean((k1 / scale) ** 2)))
        h = min(0.01 * d0 / d1 if d1 > 0 else 1e-6, t_end)

    times, n1s, drifts = [t], [y[0]], [0.0]
    snap_times, snaps = [t], [StateVector(y, t)]
    accepted = rejected = 0
    h_min_seen, h_max_seen = math.inf, 0.0
    K = np.empty((7, p.M))

    while t < t_stop - 1e-14 * t_stop:
        h = min(h, t_stop - t)
        if fixed_step is None and h < 1e-14 * t_end:
            raise StiffnessError(
                f"step size collapsed to {h:.3g} at t={t:.6g}; "
                "the explicit pair cannot resolve this regime — loosen tolerances "
                "or reduce stiffness (smaller K*M)"
            )
        K[0] = k1
        with np.errstate(invalid="ignore"):
            for i in range(1, 7):
                yi = y + h * (np.array(_A[i]) @ K[:i])
                K[i] = f(t + _C[i] * h, yi)
            y5 = y + h * (_B5 @ K)
        if not np.all(np.isfinite(y5)):
            raise BlowUpError(t)
        err_vec = h * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

        if fixed_step is not None or err <= 1.0:
            t += h
            y = y5
            k1 = K[6] if fixed_step is None else f(t, y)  # FSAL
            accepted += 1
            h_min_seen, h_max_seen = min(h_min_seen, h), max(h_max_seen, h)
            times.append(t)
            n1s.append(y[0])
            drifts.append((float(np.arange(1, p.M + 1) @ y) - mass0) / mass0)
            if accepted % snapshot_stride == 0:
                snap_times.append(t)
                snaps.append(StateVector(y, t))
        else:
            rejected += 1
        if fixed_step is None:
            # modest growth cap: the regime is stability-limited, and an
            # aggressive cap causes accept/reject thrashing at the boundary
            factor = 0.9 * (1.0 / err) ** 0.2 if err > 0 else 1.3
            factor = min(1.3, max(0.2, factor))
            if err > 1.0:
                factor = min(factor, 1.0)  # never grow right after a rejection
            h *= factor

    if snap_times[-1] != t:
        snap_times.append(t)
        snaps.append(StateVector(y, t))
    return Trajectory(
        params=p,
        times=np.array(times),
        n1=np.array(n1s),
        mass_drift=np.array(drifts),
        snapshot_times=np.array(snap_times),
        snapshots=snaps,
        step_stats={"accepted": accepted, "rejected": rejected,
                    "dt_min": h_min_seen, "dt_max": h_max_seen},
    )


def oscillation_metrics(traj: Trajectory, window: float = 0.5) -> dict:
    """Late-window amplitude and period estimate of the monomer density.

    ``window`` is the trailing fraction of the time span used.  The period is
    the mean spacing of upward crossings of the window mean; with fewer than
    two crossings the result carries ``period = None``.
    """
    t, n1 = traj.times, traj.n1
    t0 = t[-1] - window * (t[-1] - t[0])
    sel = t >= t0
    tw, nw = t[sel], n1[sel]
    mean = float(np.mean(nw))
    amplitude = float(np.max(nw) - np.min(nw))
    below = nw[:-1] < mean
    above = nw[1:] >= mean
    crossings = tw[1:][below & above]
    if len(crossings) < 2:
        return {"amplitude": amplitude, "period": None, "mean": mean,
                "n_crossings": int(len(crossings))}
    period = float(np.mean(np.diff(crossings)))
    return {"amplitude": amplitude, "period": period, "mean": mean,
            "n_crossings": int(len(crossings))}


def perturbed_equilibrium(p: ModelParams, delta: float, mode: np.ndarray | None = None) -> StateVector:
    """Constant equilibrium plus a mass-neutral perturbation of size ``delta``.

    ``mode`` defaults to the real part of the most unstable eigenvector (or
    the kernel direction complement when no unstable pair exists).  The
    perturbation is projected onto the hyperplane ``sum_ell ell v_ell = 0``,
    so the total mass is exactly that of the equilibrium.
    """
    base = np.full(p.M, p.A)
    if delta == 0.0:
        return StateVector(base)
    if mode is None:
        spec = roots.spectrum_via_F(p)
        unstable = [(lam, phi) for lam, phi, _ in spec.records
                    if lam.imag > 1e-12 and lam.real > 1e-12]
        if unstable:
            lam, phi = max(unstable, key=lambda r: r[0].real)
            mode = roots.eigenvector_for_phi(p, phi).real
        else:
            mode = np.ones(p.M)
    v = np.array(mode, dtype=float)
    w = np.arange(1, p.M + 1, dtype=float)
    v = v - (w @ v) / (w @ w) * w
    norm = np.max(np.abs(v))
    if norm == 0:
        raise ValueError("perturbation mode lies entirely in the mass direction")
    return StateVector(base + delta * v / norm)


def trajectory_csv(traj: Trajectory) -> str:
    """Full-state snapshot rows as CSV with header ``t,n_1,...,n_M,mass``."""
    p = traj.params
    header = "t," + ",".join(f"n_{ell}" for ell in range(1, p.M + 1)) + ",mass"
    lines = [header]
    for s in traj.snapshots:
        mass = total_mass(p, s)
        lines.append(",".join([f"{s.t:.17g}"] + [f"{x:.17g}" for x in s.n] + [f"{mass:.17g}"]))
    return "\n".join(lines) + "\n"
