import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import DATA
from denominal.stats import (
    DegenerateDataError,
    mean_std,
    p_from_r,
    pearson,
    student_t_sf,
    welch_t,
)

T_ORACLE = json.loads((DATA / "t_oracle.json").read_text())
WELCH_UNEQUAL = json.loads((DATA / "welch_unequal_oracle.json").read_text())["cases"]


def test_mean_std_examples():
    assert mean_std([2, 2, 2]) == (2, 0)
    assert mean_std([1, 2, 3]) == (2, 1)
    m, s = mean_std([1, 3, 2, 5])
    assert m == 2.75 and s == pytest.approx(math.sqrt(8.75 / 3), abs=1e-15)
    with pytest.raises(DegenerateDataError):
        mean_std([1.0])


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]).r == pytest.approx(1, abs=1e-15)
    assert pearson([1, 2, 3], [3, 2, 1]).r == pytest.approx(-1, abs=1e-15)
    # exact value 5.5 / sqrt(5 * 8.75)
    res = pearson([1, 2, 3, 4], [1, 3, 2, 5])
    assert res.r == pytest.approx(5.5 / math.sqrt(43.75), abs=1e-15)
    assert res.r == pytest.approx(T_ORACLE["spec_welch"]["r"], abs=1e-12)
    with pytest.raises(DegenerateDataError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(DegenerateDataError):
        pearson([1, 2], [1, 2])


def test_p_from_r_examples():
    assert p_from_r(0.0, 100) == 1.0
    assert p_from_r(1.0, 10) == 0.0 and p_from_r(-1.0, 10) == 0.0
    assert p_from_r(0.47, 291) == pytest.approx(1.5e-17, rel=0.5)
    assert p_from_r(0.51, 31) == pytest.approx(0.0034, abs=1e-4)


def test_welch_examples():
    same = welch_t([1, 2, 3], [1, 2, 3])
    assert same.t == 0 and same.p_two_tailed == 1
    ref = T_ORACLE["spec_welch"]
    res = welch_t([1, 2, 3, 4], [1, 3, 2, 5])
    assert res.t == pytest.approx(ref["welch_t"], abs=1e-12)
    assert res.df == pytest.approx(ref["welch_df"], abs=1e-12)
    assert res.p_two_tailed == pytest.approx(ref["welch_p"], abs=1e-12)
    swapped = welch_t([1, 3, 2, 5], [1, 2, 3, 4])
    assert swapped.t == -res.t and swapped.p_two_tailed == res.p_two_tailed


def test_welch_degenerate():
    with pytest.raises(DegenerateDataError):
        welch_t([2, 2], [2, 2, 2])
    res = welch_t([2, 2], [3, 3, 3])
    assert res.t == -math.inf and res.p_two_tailed == 0.0
    with pytest.raises(DegenerateDataError):
        welch_t([1], [1, 2])


@pytest.mark.parametrize("case", WELCH_UNEQUAL[:200:7])
def test_welch_unequal_sizes_against_oracle(case):
    res = welch_t(case["xs"], case["ys"])
    assert res.t == pytest.approx(case["t"], abs=1e-10)
    assert res.df == pytest.approx(case["df"], abs=1e-9)
    assert res.p_two_tailed == pytest.approx(case["p"], abs=1e-10)


def test_welch_all_unequal_cases():
    worst = max(abs(welch_t(c["xs"], c["ys"]).p_two_tailed - c["p"]) for c in WELCH_UNEQUAL)
    assert worst < 1e-10


def test_pooled_variant():
    from scipy import stats as sps
    x, y = [1.0, 2.5, 3.1, 4.7, 2.2], [0.3, 1.1, 0.9]
    res = welch_t(x, y, pooled=True)
    ref = sps.ttest_ind(x, y, equal_var=True)
    assert res.df == 6
    assert res.t == pytest.approx(ref.statistic, abs=1e-12)
    assert res.p_two_tailed == pytest.approx(ref.pvalue, abs=1e-12)


def test_t_sf_examples():
    assert student_t_sf(0.0, 7.3) == 0.5
    assert student_t_sf(1.0, 1) == pytest.approx(0.25, abs=1e-15)
    assert student_t_sf(2.5, 10) == pytest.approx(T_ORACLE["sf_2_5_df10"], abs=1e-14)
    assert f"{student_t_sf(2.5, 10):.6f}" == "0.015723"


@given(st.floats(-50, 50), st.floats(0.1, 5000))
def test_t_sf_symmetry(t, df):
    assert student_t_sf(t, df) + student_t_sf(-t, df) == pytest.approx(1.0, abs=1e-12)


def test_t_sf_approaches_normal_tail():
    # The gap to the normal tail is about phi(t)(t + t^3) / (4 df), which
    # peaks near 0.155 / df; 1e-4 is therefore reached only from df ~ 1600.
    from statistics import NormalDist
    nd = NormalDist()
    for df in (1000, 1500, 2000, 5000, 1e5):
        gap = max(abs(student_t_sf(t, df) - (1 - nd.cdf(t))) for t in np.linspace(-6, 6, 241))
        assert gap < 0.17 / df
        if df >= 2000:
            assert gap < 1e-4


def test_t_sf_far_tail_keeps_relative_accuracy():
    # Cauchy: P(T > t) = 1/2 - atan(t)/pi = atan(1/t)/pi for t > 0
    for t in (1e3, 1e6, 1e9):
        assert student_t_sf(t, 1) == pytest.approx(math.atan(1 / t) / math.pi, rel=1e-12)
    assert 0 < student_t_sf(14.0, 290) < 1e-30


@given(st.floats(0.01, 0.98), st.integers(3, 500))
def test_p_from_r_monotone(r, n):
    assert p_from_r(r + 0.01, n) <= p_from_r(r, n)
    assert p_from_r(r, n + 5) <= p_from_r(r, n)
    assert p_from_r(-r, n) == p_from_r(r, n)


def test_p_from_r_strictly_decreasing():
    rs = np.linspace(0.05, 0.6, 12)
    ps = [p_from_r(r, 60) for r in rs]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    ns = range(10, 100, 10)
    ps = [p_from_r(0.3, n) for n in ns]
    assert all(a > b for a, b in zip(ps, ps[1:]))


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30),
       st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 2**32 - 1))
def test_pearson_affine_invariance(xs, a, b, seed):
    ys = list(np.asarray(xs) * 0.5 + np.random.default_rng(seed).normal(size=len(xs)))
    x = np.array(xs)
    assume(np.ptp(x) > 1e-3 * max(1.0, np.abs(x).max()))
    r = pearson(xs, ys).r
    assert pearson([a * v + b for v in xs], ys).r == pytest.approx(r, abs=1e-9)
    assert pearson([-a * v + b for v in xs], ys).r == pytest.approx(-r, abs=1e-9)


def test_welch_permutation_false_positive_rate():
    rng = np.random.default_rng(12345)
    pooled = rng.normal(size=60)
    hits = 0
    for _ in range(1000):
        perm = rng.permutation(pooled)
        if welch_t(perm[:25], perm[25:]).p_two_tailed < 0.05:
            hits += 1
    assert abs(hits / 1000 - 0.05) <= 0.02
