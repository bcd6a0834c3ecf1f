from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfbound import oracle as orc
from tfbound.oracle import (BmmQuery, BmwQuery, ConvQuery, OperatorQuery, Outcome, Verdict,
                            decide_bmm, decide_bmw, decide_bpm, decide_bpw, decide_embedding,
                            decide_lqp_embedding, decide_unweighted_convolution,
                            decide_weighted_convolution)
from tfbound.spaces import INF, Exponent

SHARP, SUFF, UNB, OOS = (Outcome.BOUNDED_SHARP, Outcome.BOUNDED_SUFFICIENT,
                         Outcome.UNBOUNDED, Outcome.OUT_OF_SCOPE)

grid = st.sampled_from([1, Fraction(4, 3), Fraction(3, 2), 2, 4, INF])
wgrid = st.sampled_from([-2, -1, 0, Fraction(1, 2), 1, 2])


def test_weighted_convolution_examples():
    v = decide_weighted_convolution(ConvQuery(1, 1, 1))
    assert v.outcome is SHARP and v.holds("case2")
    v = decide_weighted_convolution(ConvQuery(INF, 2, 2))
    assert v.outcome is SHARP and v.holds("case2")
    v = decide_weighted_convolution(ConvQuery(INF, INF, INF, 0, 1, 1))
    assert v.outcome is SHARP and v.holds("case1")
    v = decide_weighted_convolution(ConvQuery(1, 2, 2))
    assert v.outcome is UNB
    assert not any(v.holds(f"case{i}") for i in range(1, 5))


def test_conv_brute_force_plateau_for_reciprocal_weights():
    # sup_n sum_k <k>^-1 <n-k>^-1 stays bounded as the truncation grows
    vals = []
    for N in (64, 128, 256):
        k = np.arange(-N, N + 1)
        w = (1.0 + k ** 2) ** -0.5
        vals.append(np.convolve(w, w).max())
    assert vals[-1] / vals[0] < 1.5


def test_unweighted_convolution_examples():
    assert decide_unweighted_convolution(1, 1, 1).outcome is SHARP
    assert decide_unweighted_convolution(INF, Fraction(3, 2), 3).outcome is SHARP
    v = decide_unweighted_convolution(2, Fraction(1, 2), INF)
    assert v.outcome is UNB and v.witness == "1/q <= 1/q2"


def test_abs_weight_trick_is_sufficient_only():
    v = decide_unweighted_convolution(2, 1, 2, s=1, s1=1, s2=1)
    assert v.outcome is SUFF


def test_convolution_outside_banach_range():
    # unweighted queries go to the unweighted criterion, weighted ones are not guessed
    assert decide_weighted_convolution(ConvQuery(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))).outcome is SHARP
    v = decide_weighted_convolution(ConvQuery(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 1, 2, 2))
    assert v.outcome in (SUFF, OOS)


def test_embedding_examples():
    assert decide_embedding(1, 0, INF, 0)
    assert decide_embedding(Fraction(3, 2), 1, Fraction(3, 2), 1)
    assert not decide_embedding(2, 0, 1, 0)
    # witness <k>^{-3/4}: square summable, not summable
    k = np.arange(1, 10 ** 6)
    assert np.sum(k ** -1.5) < 3 and np.sum(k ** -0.75) > 100


@given(grid, wgrid, grid, wgrid, st.integers(1, 3))
def test_embedding_rule(q1, s1, q2, s2, d):
    a, b = Exponent(q1), Exponent(q2)
    s1, s2 = Fraction(s1), Fraction(s2)
    want = (s2 <= s1 and b.recip + s2 / d < a.recip + s1 / d) or (s1 == s2 and a == b)
    assert decide_embedding(q1, s1, q2, s2, d) == want


def test_bmm_examples():
    assert decide_bmm(BmmQuery(2, 2, 2, 2, 2, 2)).outcome is SHARP
    assert decide_bmm(BmmQuery(1, 1, 1, 1, INF, 1)).outcome is SHARP
    v = decide_bmm(BmmQuery(2, 2, 2, 2, 2, 2, s=1))
    assert v.outcome is UNB
    assert v.witness == "l^{p1}_{s1} in l^q_s [l^2_0 not in l^2_1]"
    v = decide_bmm(BmmQuery(2, 2, 2, 2, 2, INF, s1=1, t1=2, s2=1, t2=2))
    assert v.outcome is SHARP and v.holds("branch:convolution")
    assert v.holds("l^{p1/p}_{p s1} * l^{p2/p}_{p s2} in l^{q/p}_{p s} [l^1_2 * l^1_2 in l^inf_0]")


def test_bmm_ignores_tau():
    q = BmmQuery(2, 4, 2, 4, 1, 4, s1=1, t1=-1, s2=2, t2=0, s=1)
    vs = {decide_bmm(replace(q, tau=t)) for t in (0, Fraction(3, 10), Fraction(1, 2), 1)}
    assert len(vs) == 1


def test_bmw_examples():
    assert decide_bmw(BmwQuery(1, 1, 1, 1, INF, INF, tau=0)).outcome is SHARP
    v = decide_bmw(BmwQuery(1, INF, 1, 1, 1, 1, tau=0))
    assert v.outcome is UNB
    assert v.witness == "l^{q1}_{t1} in l^p [l^inf_0 not in l^1_0]"
    assert v.holds("branch:tau=0")
    q = BmwQuery(2, 2, 2, 2, 2, 2)
    assert decide_bmw(q).outcome is SHARP
    assert decide_bmw(q).outcome is decide_bmm(BmmQuery(2, 2, 2, 2, 2, 2)).outcome


def test_bmw_tau_one_swaps_inputs():
    q = BmwQuery(1, INF, 1, 1, 1, INF, tau=1)
    swapped = BmwQuery(1, 1, 1, INF, 1, INF, tau=0)
    assert decide_bmw(q).outcome is decide_bmw(swapped).outcome is SHARP
    assert decide_bmw(replace(q, tau=0)).outcome is UNB


def test_bpm_examples():
    sj = OperatorQuery(Fraction(1, 2), (INF, 1, 0), (2, 2, 0, 0), (2, 2, 0, 0))
    v = decide_bpm(sj)
    assert v.outcome is SHARP and v.basis[0].condition.startswith("dual:")
    bad = OperatorQuery(Fraction(1, 2), (INF, 1, 0), (INF, INF, 0, 0), (1, 1, 0, 0))
    assert decide_bpm(bad).outcome is UNB
    assert decide_bpm(OperatorQuery(0, (Fraction(1, 2), 1, 0), (2, 2), (2, 2))).outcome is OOS


@settings(max_examples=80, deadline=None)
@given(st.lists(grid.filter(lambda e: True), min_size=6, max_size=6), st.lists(wgrid, min_size=5, max_size=5))
def test_duality_map_is_an_involution(e, w):
    q = BmmQuery(*e, *w)
    back = orc.bpm_to_bmm(orc.bmm_to_bpm(q))
    assert back == q
    assert decide_bmm(back) == decide_bmm(q)


def test_bpw_examples():
    t = Fraction(1, 2)
    assert decide_bpw(OperatorQuery(t, (1, INF, 0, 0), (1, 1), (INF, INF))).outcome is SHARP
    assert decide_bpw(OperatorQuery(0, (2, 2, 0, 0), (2, 2), (2, 2))).outcome is SHARP
    assert decide_bpw(OperatorQuery(0, (INF, 1, 0, 0), (2, 2), (2, 2))).outcome is UNB


def test_lqp_embedding_examples():
    assert decide_lqp_embedding(1, 1, 0, 0, INF, INF)
    assert decide_lqp_embedding(2, 2, 0, 0, 2, 2)
    assert not decide_lqp_embedding(2, 2, 1, 0, 2, 2)


@settings(max_examples=300, deadline=None)
@given(st.lists(grid, min_size=6, max_size=6), st.lists(wgrid, min_size=6, max_size=6),
       st.sampled_from([0, Fraction(1, 4), Fraction(1, 2), 1]), st.integers(1, 2))
def test_no_internal_inconsistency_and_witness_consistency(e, w, tau, d):
    for v in (decide_bmm(BmmQuery(*e, *w[:5], tau=tau, d=d)),
              decide_bmw(BmwQuery(*e, *w, tau=tau, d=d))):
        if v.outcome is UNB:
            assert v.witness is not None and not v.holds(v.witness)
        if v.outcome is SHARP:
            assert v.witness is None


@settings(max_examples=200, deadline=None)
@given(st.lists(grid, min_size=6, max_size=6), st.lists(wgrid, min_size=5, max_size=5))
def test_verdict_json_round_trip(e, w):
    v = decide_bmm(BmmQuery(*e, *w))
    assert Verdict.from_json(v.to_json()) == v


def test_unweighted_bmm_matches_exponent_conditions():
    # the unweighted criterion is valid for all positive exponents
    q = BmmQuery(Fraction(1, 2), Fraction(1, 2), 1, 1, Fraction(1, 2), 1)
    assert decide_bmm(q).outcome is SHARP
    q = BmmQuery(2, 2, 2, 2, Fraction(1, 2), Fraction(1, 2))
    assert decide_bmm(q).outcome is UNB


def test_negative_target_weight_is_not_claimed_sharp():
    v = decide_bmm(BmmQuery(2, 2, 2, 2, 2, 2, s=-1))
    assert v.outcome is SUFF
    v = decide_bmm(BmmQuery(2, 2, 2, 2, 2, 2, s1=-1, s=-1))
    assert v.outcome in (SUFF, OOS, UNB)
    assert v.outcome is not SHARP


def test_endpoint_table_discrepancies_sit_on_boundary_rows():
    # 1/p = 1/q1 + t1 with t1 > 0: printed table allows it, strict rule does not
    q = BmwQuery(1, 2, 1, 1, 1, 1, s1=0, t1=Fraction(1, 2), tau=0)
    printed = all(c.holds for c in orc.printed_endpoint_conditions(q))
    assert printed and not decide_bmw(q).bounded
    assert "row-qa-ta" in orc.endpoint_boundary_rows(q)
    rep = orc.endpoint_table_crosscheck([q, BmwQuery(1, 1, 1, 1, INF, INF, tau=0)])
    assert rep.checked == 2 and len(rep.discrepancies) == 1 and rep.ok
