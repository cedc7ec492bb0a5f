import math

import numpy as np
import pytest

from bubbelator import charfn, hopf, roots
from bubbelator.model import ModelParams


def test_find_hopf_first_crossing_M100():
    hp = hopf.find_hopf(100, 1)
    assert hp.K == pytest.approx(0.39349, abs=1e-4)
    assert hp.omega == pytest.approx(0.021740, abs=1e-5)
    assert hp.omega > 0
    assert hp.residual_F <= 1e-10
    assert hp.residual_ReLambda <= 1e-12


def test_find_hopf_respects_seed():
    hp = hopf.find_hopf(1000, 1)
    hp2 = hopf.find_hopf(1000, 1, seed=(hp.z * (1 + 1e-4), hp.K * (1 + 1e-4)))
    assert hp2.K == pytest.approx(hp.K, rel=1e-10)


def test_find_hopf_rejects_bad_input():
    with pytest.raises(ValueError):
        hopf.find_hopf(10, 1)
    with pytest.raises(ValueError):
        hopf.find_hopf(100, 0)


def test_second_branch_sits_above_first():
    hp1 = hopf.find_hopf(1000, 1)
    hp2 = hopf.find_hopf(1000, 2)
    assert hp2.kappa > hp1.kappa
    # branch anchored near i t_2 in the scaled variable
    assert hp2.z.imag == pytest.approx(roots.tan_eq_t_roots(2)[-1], rel=0.2)


def test_crossing_magnitude_bound():
    # |lambda| * M^{3/2} stays bounded and decreases along Table-1 sizes
    vals = []
    for M in (100, 1000, 10000):
        hp = hopf.find_hopf(M, 1)
        vals.append(abs(hp.lam) * M ** 1.5)
    assert all(v < 50 for v in vals)
    assert vals[0] > vals[1] > vals[2]


def test_crossing_frequency_asymptotics():
    # omega ~ K t_j / M, improving with M
    t1 = roots.tan_eq_t_roots(1)[0]
    hp3 = hopf.find_hopf(1000, 1)
    assert hp3.omega == pytest.approx(hp3.K * t1 / 1000, rel=0.2)
    hp5 = hopf.find_hopf(100000, 1)
    assert hp5.omega == pytest.approx(hp5.K * t1 / 100000, rel=0.05)


def test_table1_partial_failure_column():
    rows = hopf.table1([100])
    assert rows[0][1] is not None and rows[0][2] is None
    csv = hopf.format_table1_csv(rows)
    assert csv.splitlines()[0] == "M,K,kappa,omega,residual_F,residual_ReLambda"
    text = hopf.format_table1_text(rows)
    assert "100" in text


def test_lambda_branch_crossing_consistency():
    M = 100
    hp = hopf.find_hopf(M, 1)
    grid = [3.0, 3.5, 3.9, 4.0, 4.5, 5.0]
    br = hopf.lambda_branch(M, 1, grid)
    assert len(br.samples) == len(grid)
    # sign change of Re lambda brackets the crossing found by Newton
    res = [(k, lam.real) for k, lam in br.samples]
    for (k1, r1), (k2, r2) in zip(res, res[1:]):
        if r1 < 0 <= r2:
            assert k1 < hp.kappa <= k2
    assert all(lam.imag > 0 for _, lam in br.samples)
    assert br.re_increasing_past_crossing
    assert br.im_increasing_past_crossing


def test_unstable_window_check_M100():
    out = hopf.unstable_window_check(100, [0.5, 3.5, 4.5])
    assert out == [(0.5, 0), (3.5, 0), (4.5, 1)]


def test_window_check_requires_sorted_probes():
    with pytest.raises(ValueError):
        hopf.unstable_window_check(100, [2.0, 1.0])
