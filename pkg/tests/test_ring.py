from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmult.errors import MismatchedRing, NonUnit, NotDivisible
from qmult.fields import GF, QQ
from qmult.ring import TruncPoly, embed_subring, render, residue, tp_inv


def P(F, cs, m=None):
    return TruncPoly.of(F, cs, m)


def test_product_in_k3():
    assert P(QQ, [1, 1], 3) * P(QQ, [1, 1, 1]) == P(QQ, [1, 2, 2])


def test_eps_squared_vanishes_in_k2():
    e = TruncPoly.eps(QQ, 2)
    assert (e * e).is_zero()


def test_frobenius_like_square_over_f2():
    assert P(GF(2), [1, 1], 3) ** 2 == P(GF(2), [1, 0, 1])


def test_inverse_of_one_plus_eps():
    assert tp_inv(P(QQ, [1, 1], 3)) == P(QQ, [1, -1, 1])


def test_inverse_of_constant_and_nonunit():
    assert tp_inv(P(QQ, [2], 3)) == P(QQ, [Fraction(1, 2)], 3)
    with pytest.raises(NonUnit):
        tp_inv(TruncPoly.eps(QQ, 3))


def test_residue_is_top_coefficient():
    assert residue(P(QQ, [2, 0, 5])) == 5


def test_subring_embedding():
    assert embed_subring(P(QQ, [1, 3]), 4) == P(QQ, [1, 0, 3, 0])
    with pytest.raises(NotDivisible):
        embed_subring(P(QQ, [1, 3]), 3)


def test_render():
    assert render(P(QQ, [1, 2, 3])) == "1 + 2*e + 3*e^2"
    assert render(TruncPoly.zero(QQ, 2)) == "0"


def test_mismatched_orders_rejected():
    with pytest.raises(MismatchedRing):
        P(QQ, [1], 2) + P(QQ, [1], 3)


def test_shift_and_valuation():
    a = P(QQ, [0, 0, 4, 1])
    assert a.valuation() == 2
    assert P(QQ, [1, 2, 0, 0]).shift(2) == P(QQ, [0, 0, 1, 2])


# ring axioms over F_5 and Q ----------------------------------------------

coeff = st.integers(-6, 6)


def polys(m):
    return st.lists(coeff, min_size=m, max_size=m)


@given(m=st.integers(1, 5), data=st.data(), p=st.sampled_from([2, 3, 5, 0]))
def test_ring_axioms(m, data, p):
    F = QQ if p == 0 else GF(p)
    a, b, c = (P(F, data.draw(polys(m))) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + (-a) == TruncPoly.zero(F, m)
    assert a * TruncPoly.one(F, m) == a


@given(m=st.integers(1, 5), data=st.data(), p=st.sampled_from([3, 5, 7, 0]))
def test_units_invert(m, data, p):
    F = QQ if p == 0 else GF(p)
    cs = data.draw(polys(m))
    a = P(F, cs)
    if a.is_unit():
        assert a * tp_inv(a) == TruncPoly.one(F, m)
    else:
        with pytest.raises(NonUnit):
            tp_inv(a)


@given(d=st.integers(1, 3), k=st.integers(1, 3), data=st.data())
def test_embedding_is_a_ring_map(d, k, data):
    a, b = P(QQ, data.draw(polys(d))), P(QQ, data.draw(polys(d)))
    m = d * k
    assert embed_subring(a * b, m) == embed_subring(a, m) * embed_subring(b, m)
    assert embed_subring(a + b, m) == embed_subring(a, m) + embed_subring(b, m)
