from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmult.errors import ParseError, ThetaNotOrthogonal
from qmult.quiver import (
    QuiverWithMult,
    build_framed,
    derived_constants,
    double_quiver,
    euler_form,
    is_generic,
    kronecker,
    opposite_quiver,
    rep_dimension,
    star,
    thickened_quiver,
    unfolded_quiver,
)


def test_constants_4_6():
    c = derived_constants(kronecker((4, 6))).pairs[("1", "2")]
    assert (c.m_ij, c.mu_ij, c.f_ji, c.f_ij) == (2, 12, 2, 3)
    Q = kronecker((4, 6))
    assert (Q.delta, Q.M) == (2, 12)


def test_constants_2_3():
    Q = kronecker((2, 3))
    c = derived_constants(Q).pairs[("1", "2")]
    assert (c.m_ij, c.mu_ij, c.f_ji, c.f_ij) == (1, 6, 2, 3)
    assert (Q.delta, Q.M) == (1, 6)


def test_constant_multiplicity():
    Q = kronecker((5, 5))
    c = derived_constants(Q).pairs[("1", "2")]
    assert (c.m_ij, c.mu_ij, c.f_ji, c.f_ij) == (5, 5, 1, 1)
    assert Q.delta == Q.M == 5


def test_euler_form_kronecker():
    assert euler_form(kronecker((2, 3)), (1, 1), (1, 1)) == -7


def test_euler_form_without_arrows():
    Q = QuiverWithMult.build(["1", "2"], [], [2, 3])
    assert euler_form(Q, (1, 2), (3, 1)) == 2 * 3 + 3 * 2


def test_euler_form_classical():
    assert euler_form(kronecker((1, 1)), (1, 1), (1, 1)) == 0


def test_genericity_examples():
    r = {"1": 1, "2": 1}
    assert is_generic({"1": -1, "2": 1}, None, r) == "theta_generic"
    assert is_generic({"1": 0, "2": 0}, None, r) == "neither"
    assert is_generic({"1": 0, "2": 0}, {"1": -1, "2": 1}, r) == "pair_generic"
    with pytest.raises(ThetaNotOrthogonal):
        is_generic({"1": 1, "2": 1}, None, r)


def test_framed_single_vertex():
    Q = QuiverWithMult.build(["1"], [], [1])
    fr = build_framed(Q, {"1": 1}, {"1": 1})
    assert fr.theta_hat({"1": 0}) == {"1": 1, fr.inf: -1}
    assert is_generic(fr.theta_hat({"1": 0}), None, fr.rank) == "theta_generic"


def test_framed_multiplicity_option_and_zero_framing():
    Q = QuiverWithMult.build(["1"], [], [2])
    fr = build_framed(Q, {"1": 2}, {"1": 1}, m_inf=2)
    assert fr.quiver.mult[fr.inf] == 2
    assert len(fr.quiver.arrows) == 2
    fr0 = build_framed(Q, {"1": 0}, {"1": 1})
    assert fr0.quiver.arrows == ()


@given(
    mult=st.tuples(st.integers(1, 4), st.integers(1, 4)),
    r=st.tuples(st.integers(0, 3), st.integers(0, 3)),
    theta=st.integers(-3, 3),
)
def test_framed_theta_hat_generic(mult, r, theta):
    Q = kronecker(mult)
    rv = {"1": r[0], "2": r[1]}
    th = {"1": theta * r[1], "2": -theta * r[0]}
    fr = build_framed(Q, {"1": 1, "2": 1}, rv)
    assert is_generic(fr.theta_hat(th), None, fr.rank) == "theta_generic"


def test_thickened_weights_constant():
    Q = kronecker((3, 3), 1)
    weights = sorted(t.weight for t in thickened_quiver(Q).arrows)
    assert weights == [0, 1, 2]


def test_thickened_minimum_at_truncation_slot():
    Q = kronecker((2, 3), 1)
    tq = thickened_quiver(Q, {"1": 3, "2": 2})
    arrows = tq.by_arrow("a")
    assert len(arrows) == 6
    zero = [t.key for t in arrows if t.weight == 0]
    assert zero == [("a", 0, 1, 0)]
    assert min(t.weight for t in arrows) == 0


def test_unfolded_b2_example():
    Q = kronecker((2, 1), 1)
    U = unfolded_quiver(Q)
    assert len(U.vertices) == 3
    assert len(U.arrows) == 2
    assert len({a.target for a in U.arrows}) == 1
    assert set(U.mult.values()) == {2}


def test_unfolded_trivial_multiplicity():
    Q = kronecker((1, 1))
    assert unfolded_quiver(Q) == Q


def test_double_and_opposite():
    Q = kronecker((2, 3))
    D = double_quiver(Q)
    assert len(D.arrows) == 4
    assert sorted(a.id for a in D.arrows) == ["a", "a*", "b", "b*"]
    assert all(star(star(a.id)) == a.id for a in D.arrows)
    O = opposite_quiver(Q)
    assert all((a.source, a.target) == ("2", "1") for a in O.arrows)
    L = double_quiver(QuiverWithMult.build(["1"], [("a", "1", "1")], [3]))
    assert [(a.source, a.target) for a in L.arrows] == [("1", "1"), ("1", "1")]


def test_json_round_trip():
    Q = QuiverWithMult.build(["x", "y", "z"], [("p", "x", "y"), ("q", "y", "z"), ("l", "z", "z")], [2, 3, 4])
    assert QuiverWithMult.from_dict(Q.to_dict()) == Q


def test_rejects_bad_input():
    with pytest.raises(ParseError):
        QuiverWithMult.build(["1"], [("a", "1", "2")])
    with pytest.raises(ParseError):
        QuiverWithMult.build(["1", "1"], [])
    with pytest.raises(ParseError):
        QuiverWithMult.build(["1"], [], [0])


mults = st.tuples(st.integers(1, 6), st.integers(1, 6))


@given(mults)
def test_pair_identities(m):
    Q = kronecker(m, 1)
    c = derived_constants(Q).pairs[("1", "2")]
    assert c.m_ij * c.f_ij * c.f_ji == c.mu_ij
    assert math.gcd(c.f_ij, c.f_ji) == 1
    assert len(thickened_quiver(Q).arrows) == c.mu_ij
    assert len(unfolded_quiver(Q).arrows) == c.mu_ij


@given(mults, st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_euler_bilinear(m, vals):
    Q = kronecker(m)
    r, s, t = vals[0:2], vals[2:4], vals[4:6]
    rs = [a + b for a, b in zip(r, s)]
    assert euler_form(Q, rs, t) == euler_form(Q, r, t) + euler_form(Q, s, t)
    assert euler_form(Q, t, rs) == euler_form(Q, t, r) + euler_form(Q, t, s)


@given(mults, st.tuples(st.integers(0, 3), st.integers(0, 3)))
def test_dimension_formula(m, r):
    Q = kronecker(m)
    rv = {"1": r[0], "2": r[1]}
    assert rep_dimension(Q, rv) == -euler_form(Q, rv, rv) + sum(Q.mult[i] * rv[i] ** 2 for i in Q.vertices)


@given(mults)
def test_thickened_weights_nonnegative(m):
    Q = kronecker(m)
    for aid in ("a", "b"):
        ws = [t.weight for t in thickened_quiver(Q).by_arrow(aid)]
        assert min(ws) == 0 and ws.count(0) == 1
