import cmath
import math

import mpmath
import numpy as np
import pytest

from bubbelator import charfn, linalg, roots
from bubbelator.model import ModelParams


def test_tan_roots_residual_and_brackets():
    ts = roots.tan_eq_t_roots(8)
    for j, t in enumerate(ts, start=1):
        # the residual floor scales with t (roundoff of t*cos t)
        assert abs(math.sin(t) - t * math.cos(t)) <= 1e-13 * (1.0 + t)
        assert math.cos(t) < 0
        assert math.pi + 2 * math.pi * (j - 1) < t < 1.5 * math.pi + 2 * math.pi * (j - 1)


def test_tan_roots_against_mpmath():
    ts = roots.tan_eq_t_roots(4)
    with mpmath.workdps(40):
        for j, t in enumerate(ts, start=1):
            ref = mpmath.findroot(lambda x: mpmath.sin(x) - x * mpmath.cos(x),
                                  mpmath.mpf(t))
            assert abs(t - float(ref)) <= 1e-12 * float(ref)


def test_kappa_j0_values():
    # kappa_j0 = (sqrt(1 + t_j^2) - 1)^(1/2)
    t1 = roots.tan_eq_t_roots(1)[0]
    assert roots.kappa_j0(1) == pytest.approx(math.sqrt(math.hypot(1, t1) - 1), rel=1e-14)
    assert roots.kappa_j0(1) < roots.kappa_j0(2) < roots.kappa_j0(3)


def test_q_root_curve_anchor_and_residuals():
    curve = roots.q_root_curve(1, [0.8, 1.5, roots.kappa_j0(1), 2.5])
    assert curve.t_j == pytest.approx(4.4934094579, rel=1e-9)
    # the anchor kappa_j0 maps to z = i t_j
    for kappa, z in curve.samples:
        assert abs(charfn.Q_of_z(z, kappa).value) <= 1e-10
        assert z.imag > 0
        if kappa == pytest.approx(curve.kappa0):
            assert z == pytest.approx(1j * curve.t_j, abs=1e-8)
    # real part changes sign across the anchor
    res = {k: z.real for k, z in curve.samples}
    assert res[0.8] < 0 < res[2.5]


@pytest.mark.parametrize("M,K", [(5, 1.0), (12, 0.3), (12, 3.0)])
def test_spectrum_matches_oracle(M, K):
    p = ModelParams(M, K)
    oracle = linalg.charpoly_oracle_spectrum(linalg.assemble_B(p)).eigenvalues
    spec = roots.spectrum_via_F(p).eigenvalues
    assert len(spec) == M
    d = max(max(np.min(np.abs(spec - x)) for x in oracle),
            max(np.min(np.abs(oracle - x)) for x in spec))
    assert d <= 1e-8


def test_spectrum_conjugation_closure():
    spec = roots.spectrum_via_F(ModelParams(40, 2.0))
    lam = spec.eigenvalues
    for x in lam:
        assert np.min(np.abs(lam - x.conjugate())) <= 1e-9 * (1.0 + abs(x))


def test_spectrum_contains_zero_and_satisfies_F():
    p = ModelParams(30, 1.0)
    spec = roots.spectrum_via_F(p)
    assert spec.n_zero == 1
    for lam, phi, simple in spec.records:
        if lam == 0:
            continue
        v = charfn.F_of_phi(p, phi)
        ok_rel = abs(v.value) <= 1e-9 * roots._F_scale(p, phi)
        ok_step = abs(v.value) <= 1e-11 * (1 + abs(phi)) * abs(v.derivative)
        assert ok_rel or ok_step
        assert simple


def test_spectrum_drops_spurious_roots():
    p = ModelParams(20, 1.0)
    spec = roots.spectrum_via_F(p)
    A = p.A
    # lambda values of the spurious phi points must not appear unless they
    # are genuine eigenvalues confirmed by the oracle
    oracle = linalg.charpoly_oracle_spectrum(linalg.assemble_B(p)).eigenvalues
    for lam in spec.eigenvalues:
        assert np.min(np.abs(oracle - lam)) <= 1e-8


def test_eigenvector_residual():
    p = ModelParams(100, 3.0)
    B = linalg.assemble_B(p).entries
    spec = roots.spectrum_via_F(p)
    checked = 0
    for lam, phi, _ in spec.records:
        if lam.real > 1e-12 and lam.imag > 1e-12:
            V = roots.eigenvector_for_phi(p, phi)
            assert np.max(np.abs(B @ V - lam * V)) <= 1e-9
            checked += 1
    assert checked == 2


def test_count_unstable_pairs_small_regime():
    # kappa = 0.5 is well inside the stable window for any M
    assert roots.count_unstable_pairs(ModelParams.from_kappa(64, 0.5)) == 0


def _half_disk_contour(R=10.0, r=0.1, n=120):
    pts = [R * cmath.exp(1j * th) for th in np.linspace(-math.pi / 2, math.pi / 2, n)]
    pts += [1j * y for y in np.linspace(R, r, n // 2)]
    pts += [r * cmath.exp(1j * th) for th in np.linspace(math.pi / 2, -math.pi / 2, n // 4)]
    pts += [1j * y for y in np.linspace(-r, -R, n // 2)]
    return pts


def test_argument_principle_on_Q():
    # Q has no roots in the open right half plane below the first crossing
    # and one conjugate pair above it (double root at z = 0 is excluded by
    # the indentation)
    contour = _half_disk_contour()
    for kappa, expect in [(0.5, 0), (1.5, 0), (2.5, 2)]:
        cnt = roots.count_zeros_argument_principle(
            lambda z: charfn.Q_of_z(z, kappa).value, contour)
        assert cnt == expect


def test_argument_principle_polynomial():
    # (z-1)(z-2)(z+3) inside |z|=2.5: two roots
    f = lambda z: (z - 1) * (z - 2) * (z + 3)
    circle = [2.5 * cmath.exp(2j * math.pi * k / 64) for k in range(64)]
    assert roots.count_zeros_argument_principle(f, circle) == 2


def test_newton_complex_simple_case():
    z, res, ok = roots.newton_complex(lambda z: (z * z + 1.0, 2.0 * z), 0.3 + 2.0j)
    assert ok
    assert z == pytest.approx(1j, abs=1e-12)
