from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import varied_quivers
from qmult import linalg as la
from qmult.errors import NotModuleLinear
from qmult.fields import GF, QQ
from qmult.quiver import kronecker
from qmult.ring import TruncPoly
from qmult.rep import (
    ClassicalRep,
    GroupElem,
    HomElem,
    RepPoint,
    act,
    act_classical,
    compress_full,
    count_free_submodules,
    enumerate_free_submodules,
    expand_full,
    is_eps_stable,
    point_from_coords,
    random_group_elem,
    random_point,
    section_iota,
    sigma_twist,
    submodule_rank,
    thicken_coords,
    thicken_inverse,
    truncate,
    zero_point,
)


def one_arrow(m):
    return kronecker(m, 1)


def test_expand_trivial_multiplicity():
    h = HomElem.from_coords(QQ, 1, 1, 2, 2, [QQ(c) for c in (1, 2, 3, 4)])
    assert expand_full(h) == [[1, 2], [3, 4]]


def test_expand_coprime_single_block():
    h = HomElem.from_coords(GF(7), 2, 3, 1, 1, range(6))
    assert expand_full(h) == [[0, 1], [2, 3], [4, 5]]


def test_expand_toeplitz_shape():
    h = HomElem(QQ, 2, 2, 1, 1, (((QQ(3),),), ((QQ(5),),)))
    assert expand_full(h) == [[3, 5], [0, 3]]


def test_compress_rejects_non_toeplitz():
    with pytest.raises(NotModuleLinear):
        compress_full(QQ, [[QQ(1), QQ(0)], [QQ(0), QQ(2)]], 2, 2, 1, 1)


def test_truncation_reads_block():
    Q = one_arrow((2, 3))
    x = RepPoint.make(Q, (1, 1), QQ, {"a": HomElem(QQ, 2, 3, 1, 1, (((1, 2), (3, 4), (5, 6)),))})
    assert truncate(x)["a"] == ((5,),)


def test_section_places_entry():
    Q = one_arrow((2, 3))
    v = ClassicalRep.make(Q, (1, 1), QQ, {"a": [[QQ(5)]]})
    assert section_iota(v)["a"].blocks == (((0, 0), (0, 0), (5, 0)),)
    zero = ClassicalRep.make(Q, (1, 1), QQ, {"a": [[QQ(0)]]})
    assert section_iota(zero).is_zero()


def test_truncation_constant_multiplicity_is_constant_term():
    Q = one_arrow((3, 3))
    x = point_from_coords(Q, (1, 1), QQ, [QQ(7), QQ(8), QQ(9)])
    assert truncate(x)["a"] == ((7,),)


def test_sigma_is_identity_when_source_divides():
    Q = one_arrow((1, 3))
    x = point_from_coords(Q, (1, 1), GF(5), [1, 2, 3])
    assert sigma_twist(x) == x


def test_sigma_squared_vanishes_for_2_1():
    Q = one_arrow((2, 1))
    x = point_from_coords(Q, (1, 1), GF(5), [3, 4])
    s = sigma_twist(x)
    assert not s.is_zero()
    assert sigma_twist(s).is_zero()


def test_identity_and_delta_act_trivially(rng):
    Q = kronecker((2, 4))
    F = GF(5)
    x = random_point(Q, (2, 1), F, rng)
    assert act(GroupElem.identity(Q, (2, 1), F), x) == x
    lam = TruncPoly.of(F, [3, 2])
    g = GroupElem.from_delta(Q, (2, 1), lam)
    assert g.is_in_delta()
    assert act(g, x) == x


def test_constant_multiplicity_thickened_coordinates():
    Q = one_arrow((3, 3))
    x = point_from_coords(Q, (1, 1), QQ, [QQ(7), QQ(8), QQ(9)])
    c = thicken_coords(x)
    assert [c[("a", n, 0, 0)] for n in range(3)] == [[[7]], [[8]], [[9]]]


def test_free_submodule_count_example():
    subs = enumerate_free_submodules(2, 2, 1, GF(3))
    assert len(subs) == 12 == count_free_submodules(2, 2, 1, 3)
    assert len(enumerate_free_submodules(2, 2, 0, GF(3))) == 1
    assert len(enumerate_free_submodules(2, 2, 2, GF(3))) == 1


def _row_space(F, vecs, n):
    R, piv = la.rref(F, vecs, ncols=n) if vecs else ([], [])
    return la.to_tuple([row for row in R if any(row)])


@pytest.mark.parametrize("m,r,q", [(2, 2, 2), (2, 2, 3), (3, 2, 2), (2, 3, 2), (1, 3, 2)])
def test_free_submodules_match_brute_force(m, r, q):
    """Every epsilon-stable subspace of dimension m r' with rank r' is hit exactly once."""
    F = GF(q)
    n = m * r
    for rp in range(r + 1):
        brute = set()
        for basis in la.enumerate_subspaces(F, n, m * rp):
            if is_eps_stable(F, basis, m, r) and submodule_rank(F, basis, m, r) == rp:
                brute.add(_row_space(F, basis, n))
        listed = [_row_space(F, N.basis(), n) for N in enumerate_free_submodules(m, r, rp, F)]
        assert len(listed) == len(set(listed))
        assert set(listed) == brute
        assert len(brute) == count_free_submodules(m, r, rp, q)


# random properties ---------------------------------------------------------

seeds = st.integers(0, 10**6)


@given(seeds, st.sampled_from(range(3)))
def test_action_law_and_truncation_equivariance(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    F = GF(3)
    r = {i: rng.randint(0, 2) for i in Q.vertices}
    x = random_point(Q, r, F, rng)
    g, h = random_group_elem(Q, r, F, rng), random_group_elem(Q, r, F, rng)
    assert act(g * h, x) == act(g, act(h, x))
    assert truncate(act(g, x)) == act_classical(g.reduce(), truncate(x))
    assert truncate(section_iota(truncate(x))) == truncate(x)


@given(seeds, st.sampled_from(range(3)))
def test_section_is_levi_equivariant(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    F = GF(5)
    r = {i: rng.randint(0, 2) for i in Q.vertices}
    v = truncate(random_point(Q, r, F, rng))
    gbar = random_group_elem(Q, r, F, rng).reduce()
    lhs = section_iota(act_classical(gbar, v))
    rhs = act(GroupElem.levi(Q, gbar, F), section_iota(v))
    assert lhs == rhs


@given(seeds, st.sampled_from(range(3)))
def test_thickened_round_trip_and_sigma(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    F = QQ
    r = {i: rng.randint(0, 2) for i in Q.vertices}
    x = random_point(Q, r, F, rng)
    assert thicken_inverse(Q, r, F, thicken_coords(x)) == x
    s = sigma_twist(x)
    for a in Q.arrows:
        assert la.rank(F, expand_full(s[a.id])) <= la.rank(F, expand_full(x[a.id]))
    gbar = random_group_elem(Q, r, F, rng).reduce()
    levi = GroupElem.levi(Q, gbar, F)
    assert sigma_twist(act(levi, x)) == act(levi, sigma_twist(x))


@given(seeds)
def test_compress_expand_round_trip(seed):
    rng = random.Random(seed)
    F = GF(7)
    mi, mj = rng.randint(1, 4), rng.randint(1, 4)
    ri, rj = rng.randint(0, 2), rng.randint(0, 2)
    h = HomElem.from_coords(F, mi, mj, ri, rj, [F.random(rng) for _ in range(HomElem.zero(F, mi, mj, ri, rj).ncoords)])
    assert compress_full(F, expand_full(h), mi, mj, ri, rj) == h


def test_zero_point_truncates_to_zero():
    Q = kronecker((2, 3))
    assert all(not any(map(any, A)) for _, A in truncate(zero_point(Q, (1, 2), QQ)).map_items)
