import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ulbound.bounds import (
    BoundContext,
    BoundError,
    classify_tau,
    dgs_bound,
    interval,
    levenshtein_bound,
    levenshtein_curve,
    levenshtein_formula,
    solve_s,
    solve_s_extended,
)
from ulbound.orthopoly import greatest_zero


@pytest.mark.parametrize("n,tau,value", [(4, 5, 20), (4, 6, 30), (3, 2, 4), (3, 1, 2), (24, 1, 2), (10, 4, 65)])
def test_dgs_values(n, tau, value):
    assert dgs_bound(n, tau) == value


def test_dgs_overflow_guard():
    with pytest.raises(OverflowError):
        dgs_bound(200, 200)


def test_dgs_rejects_bad_input():
    with pytest.raises(BoundError):
        dgs_bound(1, 3)


@pytest.mark.parametrize("n", [3, 4, 7])
def test_levenshtein_at_minus_one(n):
    assert levenshtein_bound(n, 1, -1.0) == pytest.approx(2.0)


def test_levenshtein_endpoint_n4():
    assert levenshtein_bound(4, 5, greatest_zero(4, 3, 1, 0)) == pytest.approx(30, rel=1e-12)


def test_levenshtein_interval_check():
    with pytest.raises(BoundError):
        levenshtein_bound(4, 5, 0.9)


def test_levenshtein_formula_against_oracle():
    for n in (3, 4, 9):
        for tau in range(1, 9):
            lo, hi = oracles.interval(n, tau)
            for s in np.linspace(lo, hi, 7)[1:-1]:
                assert levenshtein_formula(n, tau, s) == pytest.approx(oracles.levenshtein(n, tau, s), rel=1e-11)


def test_intervals_match_oracle_and_partition():
    for n in (3, 4, 8, 15):
        prev_hi = -1.0
        for tau in range(1, 12):
            iv = interval(n, tau)
            lo, hi = oracles.interval(n, tau)
            assert iv.lo == pytest.approx(lo, abs=1e-12) and iv.hi == pytest.approx(hi, abs=1e-12)
            assert iv.lo < iv.hi
            assert iv.lo == pytest.approx(prev_hi, abs=1e-13)
            prev_hi = iv.hi


@pytest.mark.parametrize("n", range(3, 25))
def test_endpoint_identities(n):
    for k in range(1, 11):
        t11 = greatest_zero(n, k - 1, 1, 1)
        d_odd = dgs_bound(n, 2 * k - 1)
        assert abs(levenshtein_formula(n, 2 * k - 1, t11) - d_odd) / d_odd < 1e-9
        if k >= 2:
            assert abs(levenshtein_formula(n, 2 * k - 2, t11) - d_odd) / d_odd < 1e-9
        t10 = greatest_zero(n, k, 1, 0)
        d_even = dgs_bound(n, 2 * k)
        assert abs(levenshtein_formula(n, 2 * k - 1, t10) - d_even) / d_even < 1e-9
        assert abs(levenshtein_formula(n, 2 * k, t10) - d_even) / d_even < 1e-9


@pytest.mark.parametrize("n", [3, 4, 10])
def test_levenshtein_increasing(n):
    for tau in range(1, 9):
        iv = interval(n, tau)
        vals = [levenshtein_bound(n, tau, s) for s in np.linspace(iv.lo, iv.hi, 100)]
        assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("n,N,tau,k", [(4, 24, 5, 3), (10, 40, 3, 2), (3, 4, 1, 1), (3, 5, 2, 2), (3, 12, 4, 3)])
def test_classify_tau(n, N, tau, k):
    ctx = classify_tau(n, N)
    assert (ctx.tau, ctx.k) == (tau, k)


def test_classify_rejects_small_N():
    with pytest.raises(BoundError):
        classify_tau(4, 2)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 20), tau=st.integers(1, 10))
def test_classify_at_dgs_boundaries(n, tau):
    d = dgs_bound(n, tau + 1)
    if d >= 3:
        assert classify_tau(n, d).tau == tau
    assert classify_tau(n, d + 1).tau == tau + 1


def test_solve_s_golden():
    ctx = solve_s(classify_tau(4, 24))
    assert abs(ctx.s - 0.4749504897) < 1e-9
    assert ctx.s == pytest.approx(oracles.solve_s(4, 24), abs=1e-13)


def test_solve_s_right_endpoint():
    ctx = solve_s(BoundContext(4, 30, 5, 3))
    assert ctx.s == greatest_zero(4, 3, 1, 0)


def test_solve_s_simplex_n3():
    assert solve_s(classify_tau(3, 4)).s == pytest.approx(-1 / 3, abs=1e-14)
    assert oracles.levenshtein(3, 2, -1 / 3) == pytest.approx(4)


@settings(max_examples=150, deadline=None)
@given(n=st.integers(3, 16), N=st.integers(3, 300))
def test_solve_s_against_brentq(n, N):
    ctx = solve_s(classify_tau(n, N))
    lo, hi = interval(n, ctx.tau).lo, interval(n, ctx.tau).hi
    assert lo - 1e-12 <= ctx.s <= hi + 1e-12
    assert abs(levenshtein_formula(n, ctx.tau, ctx.s) - N) <= 1e-9 * N
    assert ctx.s == pytest.approx(oracles.solve_s(n, N), abs=1e-10)


def test_solve_s_extended_continues_past_interval():
    # degree-1 Levenshtein equation L_1 = 1 - 1/s has no root in I_1 for N = 24
    s = solve_s_extended(4, 24, 1)
    assert s > interval(4, 1).hi
    assert levenshtein_formula(4, 1, s) == pytest.approx(24, rel=1e-9)


def test_curve_shape():
    iv6 = interval(4, 6)
    s, taus, vals = levenshtein_curve(4, np.linspace(-1, iv6.hi, 500))
    assert vals[0] == pytest.approx(2.0)
    assert np.all(np.diff(vals) >= 0)
    assert taus[-1] == 6 and vals[-1] == pytest.approx(dgs_bound(4, 7), rel=1e-10)


def test_curve_junctions():
    for tau in range(1, 6):
        hi = interval(4, tau).hi
        left = levenshtein_formula(4, tau, hi)
        right = levenshtein_formula(4, tau + 1, hi)
        assert abs(left - right) / right < 1e-8
        assert left == pytest.approx(dgs_bound(4, tau + 1), rel=1e-9)
