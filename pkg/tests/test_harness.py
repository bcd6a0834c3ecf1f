import itertools
from fractions import Fraction

import numpy as np
import pytest

from tfbound import harness as h
from tfbound.oracle import BmmQuery, BmwQuery, ConvQuery, decide_weighted_convolution
from tfbound.spaces import INF, Exponent
from tfbound.tfr import GridField2D, stft


def test_identity_suite_passes():
    rep = h.identity_suite(256)
    assert rep.passed, rep.to_dict()
    assert [c.name for c in rep.checks] == list(h.IDENTITY_TOLERANCES)


def test_identity_suite_on_zero_signal():
    rep = h.identity_suite(256, zero=True)
    assert all(c.error == 0 for c in rep.checks)


def test_broken_convention_is_caught():
    def flipped(f, g):
        V = stft(f, g)
        return GridField2D(V.samples[:, (-np.arange(f.L)) % f.L], V.steps)

    rep = h.identity_suite(256, stft_fn=flipped)
    failed = [c.name for c in rep.checks if not c.passed]
    assert failed == ["fundamental_identity"]


def test_moyal_against_direct_sum():
    rng = np.random.default_rng(5)
    f, g = h.random_gaussian_pair(rng, 64)
    assert np.allclose(h.stft_direct(f, g), stft(f, g).samples, atol=1e-13)
    assert h.moyal_ratio(f, g) == pytest.approx(1, abs=1e-10)


def test_wigner_l2_demo():
    rep = h.wigner_l2_boundedness_demo(64, n_pairs=10)
    assert rep["max_deviation"] < 1e-6
    assert rep["gaussian_ratio"] == pytest.approx(1, abs=1e-6)
    assert rep["even_odd_ratio"] == pytest.approx(1, abs=1e-6)
    assert "skipped" in rep["zero_window"]


def brute_ratio(form, N, a, b):
    """Direct definition with Python loops; only for tiny N."""
    A, B = h._dense(a, N), h._dense(b, N)
    idx = range(-N, N + 1)
    p, q = form.p, form.q

    def mixed(X, pe, qe, w):
        cols = []
        for j in idx:
            col = [abs(X[i + N, j + N]) * w[0](i) for i in idx]
            cols.append(h.lp_weighted(np.array(col), pe) * w[1](j))
        return h.lp_weighted(np.array(cols), qe)

    inner = {}
    for (i1, i2), (j1, j2) in itertools.product(itertools.product(idx, idx), repeat=2):
        v = abs(A[i1 + N, i2 + N] * B[j1 + N, j2 + N])
        if form.kind == "endpoint":
            n = (i1, j2)
        else:
            n = (i1 + j1, i2 + j2)
        inner.setdefault(n, []).append(v)
    vals, ws = [], []
    for n, lst in inner.items():
        vals.append(h.lp_weighted(np.array(lst), p))
        if form.target_radial is not None:
            ws.append((1 + n[0] ** 2 + n[1] ** 2) ** (form.target_radial / 2))
        else:
            ws.append(form.target[0](n[0]) * form.target[1](n[1]))
    lhs = h.lp_weighted(np.array(vals), q, np.array(ws))
    return lhs / (mixed(A, form.pa, form.qa, form.wa) * mixed(B, form.pb, form.qb, form.wb))


@pytest.mark.parametrize("query", [
    BmmQuery(2, 1, 4, 2, 1, 2, s1=1, t1=-1, s2=0, t2=1, s=1),
    BmmQuery(INF, 1, 2, INF, INF, 1),
    BmwQuery(1, 2, 2, 1, 2, 1, s1=1, t2=-1, s=1, t=0, tau=Fraction(1, 3)),
    BmwQuery(2, 1, 1, INF, 1, 2, s1=1, t1=1, s2=-1, s=1, t=2, tau=0),
    BmwQuery(2, 1, 1, INF, INF, 2, t1=1, s2=2, tau=1),
])
def test_form_evaluator_matches_brute_force(query):
    N = 2
    form = h.form_for(query)
    ev = h.Evaluator(form, N)
    cands = h.candidates(N, 0, "2d")
    rng = np.random.default_rng(0)
    for i in rng.choice(len(cands), 25, replace=False):
        _, a, b = cands[i]
        want = brute_ratio(form, N, a, b)
        assert ev.ratio(a, b) == pytest.approx(want, rel=1e-10)
        assert h.recompute_ratio(form, N, a, b) == pytest.approx(want, rel=1e-10)


def test_all_two_constant_is_one():
    for N in (8, 16):
        r = h.search_constant(BmmQuery(2, 2, 2, 2, 2, 2), N)
        assert r.constant == pytest.approx(1, abs=1e-12)
        assert r.constant <= r.recomputed * (1 + 1e-9)


def test_l1_constant_is_one():
    assert h.bmm_bilinear_constant(BmmQuery(1, 1, 1, 1, 1, 1), 8) == pytest.approx(1)


def test_box_growth_for_l1_target_with_l2_inputs():
    # constant boxes give exactly (2N + 1)^2: the slope in N is 2 on a log scale
    q = BmmQuery(2, 2, 2, 2, 1, 1)
    for N in (8, 16, 32):
        assert h.bmm_bilinear_constant(q, N) == pytest.approx((2 * N + 1) ** 2)


def test_endpoint_constants():
    assert h.bmw_endpoint_constant(BmwQuery(1, 1, 1, 1, INF, INF, tau=0), 8) == pytest.approx(1)
    c = [h.bmw_endpoint_constant(BmwQuery(1, INF, 1, 1, 1, INF, tau=0), N) for N in (8, 16)]
    assert c == pytest.approx([17, 33])
    with pytest.raises(ValueError):
        h.bmw_endpoint_constant(BmwQuery(1, 1, 1, 1, 1, 1), 8)


def test_search_is_deterministic_and_thread_independent(monkeypatch):
    q = BmmQuery(2, 4, 4, 2, 2, 4, s1=1, t2=1, s=1)
    monkeypatch.setenv("TFA_THREADS", "1")
    one = h.search_constant(q, 8, seed=42)
    monkeypatch.setenv("TFA_THREADS", "3")
    three = h.search_constant(q, 8, seed=42)
    assert one == three


def test_growth_study_validates_truncations():
    q = BmmQuery(2, 2, 2, 2, 2, 2)
    with pytest.raises(ValueError):
        h.growth_study(q, [8])
    with pytest.raises(ValueError):
        h.growth_study(q, [16, 8])


def test_growth_study_running_maximum():
    g = h.growth_study(BmmQuery(2, 2, 2, 2, 1, 1), [4, 8, 16], seed=1)
    assert g.constants == sorted(g.constants)
    assert g.classification == "Growing"
    assert g.to_dict()["seed"] == 1


def test_classify():
    assert h.classify([1, 1.2, 1.4]) == "Plateau"
    assert h.classify([1, 2, 4]) == "Growing"
    assert h.classify([1, 1.1, 3]) == "Inconclusive"
    assert h.classify([1, 2, 4], plateau=5) == "Plateau"
    with pytest.raises(ValueError):
        h.classify([1])


@pytest.mark.parametrize("cq", [
    ConvQuery(2, 1, 2), ConvQuery(INF, 2, 2), ConvQuery(1, 2, 2), ConvQuery(2, 2, 2, s=1),
    ConvQuery(INF, INF, INF, 0, 1, 1),
    ConvQuery(2, 1, 2, 1, 1, 1), ConvQuery(1, 1, 1, 1, 0, 0),
])
def test_convolution_verdicts_agree_with_growth(cq):
    v = decide_weighted_convolution(cq)
    g = h.growth_study(cq, [16, 32, 64, 128])
    assert g.classification == ("Plateau" if v.bounded else "Growing"), (v, g.constants)


def test_logarithmic_divergence_is_not_called_a_plateau():
    cq = ConvQuery(INF, INF, INF, 0, Fraction(1, 2), Fraction(1, 2))
    assert not decide_weighted_convolution(cq).bounded
    g = h.growth_study(cq, [16, 32, 64, 128])
    steps = np.diff(g.constants)
    assert g.classification == "Inconclusive"
    assert np.all(steps > 1) and steps.max() / steps.min() < 1.2


def test_curated_set_composition():
    cur = h.curated_queries()
    assert len(cur) == 12
    assert sum(b for _, _, b in cur) == 6
    for _, q, bounded in cur:
        assert h.decide(q).bounded == bounded


def test_form_rejects_higher_dimension():
    with pytest.raises(ValueError):
        h.form_for(BmmQuery(2, 2, 2, 2, 2, 2, d=2))
