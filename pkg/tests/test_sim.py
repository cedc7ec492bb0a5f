import numpy as np
import pytest

from bubbelator import sim
from bubbelator.model import ModelParams, StateVector, total_mass


def _fig1_state(p):
    n0 = np.full(p.M, 4.0)
    n0[0] = 4.2
    return StateVector(n0)


def test_equilibrium_stays_put():
    p = ModelParams(25, 3.0)
    s0 = StateVector(np.full(25, p.A))
    traj = sim.integrate(p, s0, 10.0)
    assert np.max(np.abs(traj.snapshots[-1].n - s0.n)) <= 1e-6


def test_mass_conservation_fig1():
    p = ModelParams(25, 3.0)
    traj = sim.integrate(p, _fig1_state(p), 50.0)
    assert np.max(np.abs(traj.mass_drift)) <= 1e-8
    assert traj.positive


def test_oscillation_saturates_and_persists():
    # the unstable pair at M=25, K=3 has growth rate ~0.021; the orbit
    # saturates near t ~ 300 into a large sustained oscillation
    p = ModelParams(25, 3.0)
    traj = sim.integrate(p, _fig1_state(p), 400.0)
    m = sim.oscillation_metrics(traj, window=0.25)  # window [300, 400]
    assert m["period"] is not None and m["period"] > 0
    assert m["amplitude"] >= 0.1 * m["mean"]
    assert np.max(np.abs(traj.mass_drift)) <= 1e-8


def test_no_oscillation_in_stable_regime():
    p = ModelParams(25, 0.1)  # kappa = 0.5, all pairs stable
    s0 = sim.perturbed_equilibrium(p, 1e-3)
    traj = sim.integrate(p, s0, 60.0)
    m = sim.oscillation_metrics(traj)
    assert m["amplitude"] < 1e-3


def test_integrator_order():
    # fixed-step self-convergence on a short Fig.-1 segment
    p = ModelParams(25, 3.0)
    s0 = _fig1_state(p)
    ref = sim.integrate(p, s0, 1.0, atol=1e-13, rtol=1e-12).snapshots[-1].n
    hs = [0.02, 0.01, 0.005, 0.0025]
    errs = []
    for h in hs:
        out = sim.integrate(p, s0, 1.0, fixed_step=h).snapshots[-1].n
        errs.append(np.max(np.abs(out - ref)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope >= 3.5


def test_blow_up_reported():
    p = ModelParams(5, 1.0)
    # negative monomer density drives n_1' ~ +n_1^2 * ... -> finite-time issues;
    # use a state engineered to explode: huge monomer density
    s0 = StateVector(np.array([1e150, 1.0, 1.0, 1.0, 1.0]))
    with pytest.raises((sim.BlowUpError, sim.StiffnessError)):
        sim.integrate(p, s0, 10.0, fixed_step=1.0)


def test_step_stats_recorded():
    p = ModelParams(10, 1.0)
    traj = sim.integrate(p, StateVector(np.ones(10)), 5.0)
    st = traj.step_stats
    assert st["accepted"] == len(traj.times) - 1
    assert st["rejected"] >= 0
    assert 0 < st["dt_min"] <= st["dt_max"]
    assert np.all(np.diff(traj.times) > 0)


def test_perturbed_equilibrium_mass_neutral():
    p = ModelParams(100, 3.0)
    eq_mass = total_mass(p, StateVector(np.full(100, p.A)))
    assert np.array_equal(sim.perturbed_equilibrium(p, 0.0).n, np.full(100, p.A))
    s = sim.perturbed_equilibrium(p, 1e-3)
    assert total_mass(p, s) == pytest.approx(eq_mass, rel=1e-12)
    rng = np.random.default_rng(0)
    s2 = sim.perturbed_equilibrium(p, 0.01, mode=rng.normal(size=100))
    assert total_mass(p, s2) == pytest.approx(eq_mass, rel=1e-12)


def test_perturbation_grows_at_linear_rate():
    # growth factor between successive envelope peaks of ||s - eq||_inf
    # matches e^{Re lambda dt} for the leading unstable pair (Re lambda 0.05836)
    p = ModelParams(100, 3.0)
    s0 = sim.perturbed_equilibrium(p, 1e-3)
    traj = sim.integrate(p, s0, 40.0, snapshot_stride=20)
    eq = np.full(100, p.A)
    ts = np.array([s.t for s in traj.snapshots])
    norms = np.array([np.max(np.abs(s.n - eq)) for s in traj.snapshots])
    n1 = norms[(ts >= 13) & (ts <= 18)].max()
    n2 = norms[(ts >= 28) & (ts <= 33)].max()
    expect = np.exp(0.05836 * 15.3)
    assert n2 / n1 == pytest.approx(expect, rel=0.5)


@pytest.mark.slow
def test_period_near_crossing():
    # slightly above the M=100 crossing the orbit oscillates at ~2 pi / omega
    p = ModelParams(100, 0.40)
    s0 = sim.perturbed_equilibrium(p, 1e-3)
    traj = sim.integrate(p, s0, 1200.0)
    m = sim.oscillation_metrics(traj)
    assert m["period"] == pytest.approx(2 * np.pi / 0.021740, rel=0.15)


def test_trajectory_csv_shape():
    p = ModelParams(5, 1.0)
    traj = sim.integrate(p, StateVector(np.ones(5)), 1.0)
    lines = sim.trajectory_csv(traj).strip().splitlines()
    assert lines[0] == "t,n_1,n_2,n_3,n_4,n_5,mass"
    assert len(lines) == len(traj.snapshots) + 1
    assert all(len(l.split(",")) == 7 for l in lines[1:])
