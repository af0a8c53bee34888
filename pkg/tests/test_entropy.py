import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shadowlab.entropy import (GapParams, binary_entropy, check_submultiplicativity,
                               count_types, gap_rhs, k_term, katok_entropy_estimate, main_report,
                               phi0_mean, spanning_number, topological_entropy_estimate,
                               type_counts)
from shadowlab.errors import InfeasibleParameters, ResolutionInsufficient
from shadowlab.maps import SmoothMap
from shadowlab.orbits import MeasureSequence, iterate, truncated_log

LOG2 = math.log(2.0)


# -- binary entropy ------------------------------------------------------------------

def test_binary_entropy_values():
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(LOG2)
    assert binary_entropy(0.25) == pytest.approx(0.5623351446188083)
    with pytest.raises(ValueError):
        binary_entropy(1.5)


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric_and_bounded(t):
    h = binary_entropy(t)
    assert 0.0 <= h <= LOG2 + 1e-15
    assert h == pytest.approx(binary_entropy(1.0 - t), abs=1e-12)


# -- combinatorial types -------------------------------------------------------------

def brute_types(n, L):
    """Each position is uncovered (0), starts an interval (1) or continues one (2)."""
    total = 0
    for word in itertools.product((0, 1, 2), repeat=n):
        ok, run = True, 0
        for i, s in enumerate(word):
            if s == 2 and (i == 0 or word[i - 1] == 0):
                ok = False
                break
            if s == 1 or s == 0:
                if 0 < run < L:
                    ok = False
                    break
                run = 1 if s == 1 else 0
            else:
                run += 1
        if ok and not 0 < run < L:
            total += 1
    return total


@pytest.mark.parametrize("n", range(0, 11))
@pytest.mark.parametrize("L", [1, 2, 3, 5])
def test_count_types_brute_force(n, L):
    assert count_types(n, L).count == brute_types(n, L)


def test_count_types_frozen_values():
    # L = 1 gives odd-indexed Fibonacci numbers
    assert [count_types(n, 1).count for n in range(6)] == [1, 2, 5, 13, 34, 89]
    assert count_types(10, 1).count == 10946
    assert count_types(4, 2).count == 8


def test_type_counts_monotone():
    for L in (1, 2, 4, 8):
        T = type_counts(60, L)
        assert all(b >= a for a, b in zip(T, T[1:]))
    for n in (10, 40):
        assert all(count_types(n, L).count >= count_types(n, L + 1).count for L in range(1, 12))


@pytest.mark.parametrize("L", [8, 12, 16, 24, 32])
def test_type_growth_bound(L):
    assert count_types(200, L).log_rate <= binary_entropy(2.0 / L) + 0.05


def test_count_types_rejects_bad_input():
    with pytest.raises(ValueError):
        count_types(-1, 2)
    with pytest.raises(ValueError):
        count_types(5, 0)


# -- spanning numbers -----------------------------------------------------------------

def test_spanning_small_set_is_one_ball(logistic):
    # all three stay within eps of the orbit of 0.3 for 6 iterates, not for 7
    X = [0.3, 0.31, 0.32]
    assert spanning_number(logistic, 1, 0.1, start_set=X).r == 1
    assert spanning_number(logistic, 6, 0.1, start_set=X).r == 1
    assert spanning_number(logistic, 7, 0.1, start_set=X).r > 1


def test_spanning_monotone(logistic):
    rs = [spanning_number(logistic, n, 0.1).r for n in range(1, 9)]
    assert all(b >= a for a, b in zip(rs, rs[1:]))
    coarse = spanning_number(logistic, 6, 0.2).r
    fine = spanning_number(logistic, 6, 0.05).r
    assert fine >= coarse


def test_spanning_resolution_guard(logistic):
    with pytest.raises(ResolutionInsufficient):
        spanning_number(logistic, 12, 0.1, max_points=10_000)


def test_spanning_separated_lower_bound(logistic):
    est = spanning_number(logistic, 6, 0.1, separated=True)
    assert est.separated_lower <= est.r


@pytest.mark.parametrize("split", [[4, 4], [3, 5], [2, 2, 4]])
def test_submultiplicativity(logistic, split):
    res = check_submultiplicativity(logistic, 8, split, 0.1)
    assert res.holds and res.rhs == math.prod(res.factors)


def test_submultiplicativity_bad_split(logistic):
    with pytest.raises(ValueError):
        check_submultiplicativity(logistic, 8, [4, 3], 0.1)


def test_topological_entropy_logistic(logistic):
    fit = topological_entropy_estimate(logistic, (0.2, 0.1), range(8, 13))
    assert fit.h == pytest.approx(LOG2, rel=0.05)
    assert fit.best.epsilon == 0.1
    assert fit.C_est >= 1.0


def test_contraction_has_zero_entropy():
    fit = topological_entropy_estimate(SmoothMap.logistic(0.5), (0.2, 0.1), range(8, 15))
    assert abs(fit.h) < 1e-9


# -- Katok estimates -----------------------------------------------------------------

def test_katok_periodic_measure():
    f = SmoothMap.logistic(3.2)
    o = iterate(f, 0.3, 20_000)
    fit = katok_entropy_estimate(f, o.measure(1000, 19_000), 0.1, range(4, 11))
    assert abs(fit.slope) < 0.01


def test_katok_doubling(doubling):
    o = iterate(doubling, N=20_000, seed=5, precision="auto")
    fit = katok_entropy_estimate(doubling, o.measure(), 0.1, range(4, 11))
    assert fit.slope == pytest.approx(LOG2, rel=0.10)


def test_katok_ulam(logistic):
    o = iterate(logistic, N=40_000, seed=5)
    fit = katok_entropy_estimate(logistic, o.measure(), 0.1, range(4, 11))
    assert fit.slope == pytest.approx(LOG2, rel=0.15)


# -- gap formula ----------------------------------------------------------------------

def test_k_term_values():
    assert k_term(0.1, 0.01, 8, 1.0, 1.0) == pytest.approx(binary_entropy(0.25))
    assert k_term(0.1, 0.01, 8, math.e, 1.0) == pytest.approx(binary_entropy(0.25) + 1 / 8)
    assert k_term(0.1, 0.01, math.inf, 5.0, 5.0) == 0.0
    with pytest.raises(InfeasibleParameters):
        k_term(0.1, 0.01, 3, 1.0, 1.0)
    with pytest.raises(InfeasibleParameters):
        k_term(0.1, 0.01, 8, 0.5, 1.0)


def test_k_term_decreases_in_L():
    vals = [k_term(0.1, 0.01, L, 2.0, 1.0) for L in range(4, 64)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_gap_rhs_arithmetic():
    assert gap_rhs(0.7, 0.1, 0.5, 8, 0.2, 0.01) == pytest.approx(
        0.7 - (7 / 8) * 0.5 * 0.6 + 0.2 + 0.02)
    # no defect mass: the bound is h_top plus the error terms
    assert gap_rhs(0.7, 0.0, 0.0, 8, 0.2, 0.01) == pytest.approx(0.92)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_gap_rhs_monotone_in_phi(p, q):
    lo, hi = sorted((p, q))
    assert gap_rhs(0.7, 0.0, hi, 8, 0.1, 0.01) <= gap_rhs(0.7, 0.0, lo, 8, 0.1, 0.01)


def test_phi0_mean_matches_direct(logistic, logistic_constants):
    o = iterate(logistic, N=20_000, seed=9)
    d = o.deriv[:o.N]
    direct = np.mean(-truncated_log(np.abs(d), 1e-3) * (np.abs(d) < 1e-3))
    got = phi0_mean(o, 1e-3, logistic_constants.lambda_log)
    assert got == pytest.approx(direct / logistic_constants.lambda_log, rel=1e-9)
    assert got >= 0.0


def test_phi0_mean_doubling_is_zero(doubling):
    o = iterate(doubling, N=1000, seed=1, precision="auto")
    assert phi0_mean(o, 1e-3, LOG2) == 0.0


def test_main_report_doubling(doubling, doubling_constants):
    o = iterate(doubling, N=40_000, seed=2, precision="auto")
    seq = MeasureSequence([o.measure(0, n) for n in (10_000, 20_000, 40_000)])
    params = GapParams(htop_n=tuple(range(8, 13)))
    rep = main_report(doubling, seq, params, constants=doubling_constants)
    assert rep.alpha == 0.0
    assert rep.rhs_main == rep.h_top_est
    assert rep.h_top_est == pytest.approx(LOG2, rel=0.05)
    assert rep.violations == 0
    assert rep.phi_mean == 0.0
    assert set(rep.to_dict()) >= {"h_top_est", "alpha", "rhs_main", "measures"}
