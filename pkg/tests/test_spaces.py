import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfbound.spaces import (INF, Constant, Exponent, Order, Radial, Separable, Sequence2D, SpaceSpec,
                            Transform, Weight1D, mixed_norm, sequence_norm_1d, weight_transform)

exps = st.sampled_from([Fraction(1, 2), 1, Fraction(4, 3), Fraction(3, 2), 2, 3, 4, "inf"])
banach = st.sampled_from([1, Fraction(4, 3), Fraction(3, 2), 2, 3, 4, "inf"])


def test_reciprocal_of_inf_is_zero():
    assert INF.recip == 0
    assert Exponent("inf").is_inf
    assert Exponent(Fraction(4, 3)).recip == Fraction(3, 4)


@given(exps)
def test_reciprocal_is_involution(p):
    e = Exponent(p)
    assert Exponent.from_reciprocal(e.recip) == e


@given(banach)
def test_conjugate(p):
    e = Exponent(p)
    assert e.recip + e.conjugate().recip == 1
    assert e.conjugate().conjugate() == e


def test_conjugate_needs_banach_range():
    with pytest.raises(ValueError):
        Exponent(Fraction(1, 2)).conjugate()


def test_scaled_quotient():
    assert INF.over(Exponent(2)).is_inf
    assert Exponent(4).over(Exponent(2)) == Exponent(2)
    with pytest.raises(ValueError):
        Exponent(2).over(INF)


def test_exponent_parsing_is_exact():
    assert Exponent("4/3").recip == Fraction(3, 4)
    assert str(Exponent("4/3")) == "4/3"
    assert str(INF) == "inf"
    assert Exponent(2) < Exponent(4) < INF
    with pytest.raises(ValueError):
        Exponent(0)


def test_power_weights():
    m = Separable(1, 2)
    assert m(3.0, 4.0) == pytest.approx(math.sqrt(10) * 17)
    assert Radial(2)(1.0, 2.0) == pytest.approx(6.0)
    assert Constant()(5.0, -7.0) == 1.0
    z = np.linspace(-5, 5, 11)
    assert np.all(Separable(-3, 2)(z, z[::-1]) > 0)


def test_weight_transforms():
    m = Separable(1, 2)
    assert weight_transform(m, Transform.J_ROTATION) == Separable(2, 1)
    assert weight_transform(m, Transform.INVOLUTION) == m
    assert weight_transform(m, Transform.ALPHA_RESTRICTION) == Weight1D(1)
    assert weight_transform(m, Transform.BETA_RESTRICTION) == Weight1D(2)
    z1, z2 = np.meshgrid(np.arange(-3, 4.0), np.arange(-2, 3.0), indexing="ij")
    assert np.allclose(weight_transform(m, Transform.J_ROTATION)(z1, z2), m(z2, -z1))
    assert np.allclose(m(-z1, -z2), m(z1, z2))
    r = m
    for _ in range(4):
        r = weight_transform(r, Transform.J_ROTATION)
    assert r == m


def test_mixed_norm_examples():
    l22 = SpaceSpec(Exponent(2), Exponent(2))
    assert mixed_norm(Sequence2D.from_dict({(0, 0): 1}), l22) == 1
    row = Sequence2D.from_dict({(k, 0): 1 for k in range(4)})
    assert mixed_norm(row, SpaceSpec(Exponent(1), INF)) == 4
    one = Sequence2D.from_dict({(1, 2): 1})
    assert mixed_norm(one, SpaceSpec(Exponent(1), Exponent(1), Separable(1, 1))) == pytest.approx(
        math.sqrt(2) * math.sqrt(5))


def test_mixed_norm_order():
    a = Sequence2D.from_dict({(0, 0): 1, (1, 1): 1})
    # l^{1,inf}: sup over n of sums over k; l^{(1,inf)}: sum over k of sups over n
    assert mixed_norm(a, SpaceSpec(Exponent(1), INF)) == 1
    assert mixed_norm(a, SpaceSpec(Exponent(1), INF, order=Order.INNER_SECOND)) == 2


def test_sequence_norm_1d_examples():
    assert sequence_norm_1d({0: 1}, Exponent(3), Weight1D(5)) == 1
    assert sequence_norm_1d({0: 1, 1: 1}, Exponent(2)) == pytest.approx(math.sqrt(2))
    assert sequence_norm_1d({2: 1}, INF, Weight1D(-1)) == pytest.approx(5 ** -0.5)


def random_seq(seed, size=12, span=4):
    rng = np.random.default_rng(seed)
    pts = np.unique(rng.integers(-span, span + 1, size=(size, 2)), axis=0)
    vals = rng.normal(size=len(pts)) + 1j * rng.normal(size=len(pts))
    return Sequence2D(pts, vals)


specs = st.builds(lambda p, q, s, t, o: SpaceSpec(Exponent(p), Exponent(q), Separable(s, t), o),
                  exps, exps, st.integers(-2, 2), st.integers(-2, 2), st.sampled_from(list(Order)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), specs, st.complex_numbers(max_magnitude=1e3, allow_nan=False))
def test_homogeneity(seed, spec, lam):
    a = random_seq(seed)
    assert mixed_norm(a.scaled(lam), spec) == pytest.approx(abs(lam) * mixed_norm(a, spec), rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), specs)
def test_monotone(seed, spec):
    a = random_seq(seed)
    shrink = Sequence2D(a.points, a.values * np.random.default_rng(seed).uniform(0, 1, a.values.size))
    assert mixed_norm(shrink, spec) <= mixed_norm(a, spec) * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), specs)
def test_triangle_or_quasi_triangle(s1, s2, spec):
    a, b = random_seq(s1), random_seq(s2)
    pts = np.vstack([a.points, b.points])
    total = Sequence2D(pts, np.concatenate([a.values, b.values]))
    dense = {}
    for k, v in zip(map(tuple, total.points), total.values):
        dense[k] = dense.get(k, 0) + v
    c = Sequence2D.from_dict(dense)
    r = min(spec.p.value, spec.q.value, 1.0)
    const = 2 ** (1 / r - 1)
    assert mixed_norm(c, spec) <= const * (mixed_norm(a, spec) + mixed_norm(b, spec)) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), exps, st.integers(-2, 2))
def test_orders_agree_when_p_equals_q(seed, p, s):
    a = random_seq(seed)
    e = Exponent(p)
    one = mixed_norm(a, SpaceSpec(e, e, Radial(s), Order.INNER_FIRST))
    two = mixed_norm(a, SpaceSpec(e, e, Radial(s), Order.INNER_SECOND))
    assert one == pytest.approx(two, rel=1e-12)


def test_sup_norm_is_weighted_max():
    a = random_seq(3)
    m = Separable(1, -1)
    want = np.max(np.abs(a.values) * m.on_points(a.k, a.n))
    assert mixed_norm(a, SpaceSpec(INF, INF, m)) == pytest.approx(want)


def test_empty_sequence_has_zero_norm():
    assert mixed_norm(Sequence2D.from_dict({}), SpaceSpec(Exponent(2), INF)) == 0


def test_sequence_round_trips():
    a = random_seq(7)
    for b in (Sequence2D.from_csv(a.to_csv()), Sequence2D.from_json(a.to_json())):
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        Sequence2D.from_csv("k,n,re,im\n0,0,1,0\n")
