from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import varied_quivers
from qmult.errors import InvalidParams
from qmult.fields import GF, QQ
from qmult.grading import (
    act_gm,
    act_gm_group,
    canonical_params,
    is_valid,
    limit_zero,
    limit_zero_group,
    line_violation,
    make_params,
    parse_grading,
    weight_table,
    zero_weight_keys,
)
from qmult.quiver import kronecker
from qmult.rep import act, random_group_elem, random_point, section_iota, thicken_coords, truncate


def test_canonical_params_2_3():
    p = canonical_params(kronecker((2, 3), 1))
    assert p.a == {"1": 3, "2": 2}
    assert p.b == {"a": 3}


def test_canonical_params_constant():
    p = canonical_params(kronecker((4, 4)))
    assert p.a == {"1": 1, "2": 1}
    assert p.b == {"a": 0, "b": 0}


def test_weights_2_3():
    Q = kronecker((2, 3), 1)
    w = weight_table(Q)
    assert sorted(w.values()) == [0, 2, 3, 4, 5, 7]
    assert w[("a", 0, 1, 0)] == 0
    assert w[("a", 0, 0, 0)] == 3


def test_weights_constant_multiplicity():
    Q = kronecker((3, 3), 1)
    assert weight_table(Q) == {("a", n, 0, 0): n for n in range(3)}


def test_zero_weights_once_per_arrow():
    for Q in varied_quivers():
        keys = zero_weight_keys(Q, canonical_params(Q))
        assert Counter(k[0] for k in keys) == Counter(a.id for a in Q.arrows)


def test_line_condition_detected():
    Q = kronecker((2, 2))
    bad = make_params(Q, {"1": 1, "2": 2})
    bad_slot = line_violation(Q, bad)
    assert bad_slot["weights"] == [0, 1]
    assert not is_valid(Q, bad)
    with pytest.raises(InvalidParams):
        act_gm(QQ(2), random_point(Q, (1, 1), QQ, random.Random(0)), bad)
    # formal mode still reports weights of the stored coordinates
    weights = act_gm(QQ(2), random_point(Q, (1, 1), QQ, random.Random(0)), bad, formal=True)
    assert weights["a"] == [[[0]], [[2]]]


def test_coprime_multiplicities_have_no_line_condition():
    Q = kronecker((2, 3))
    assert line_violation(Q, make_params(Q, {"1": 1, "2": 5})) is None


def test_t_equal_one_is_identity(rng):
    Q = kronecker((2, 3))
    x = random_point(Q, (1, 2), GF(5), rng)
    assert act_gm(1, x, canonical_params(Q)) == x


def test_fixed_locus_is_section_image(rng):
    for Q in varied_quivers():
        r = {i: 1 for i in Q.vertices}
        v = truncate(random_point(Q, r, GF(5), rng))
        y = section_iota(v)
        assert act_gm(2, y, canonical_params(Q)) == y
        assert limit_zero(y) == v


def test_non_default_beta_moves_fixed_locus():
    Q = kronecker((2, 3), 1)
    p = make_params(Q, None, {"a": 4})
    assert is_valid(Q, p)
    assert min(weight_table(Q, None, p).values()) == 1
    with pytest.raises(InvalidParams):
        limit_zero(random_point(Q, (1, 1), QQ, random.Random(1)), p)


def test_parse_grading():
    assert parse_grading("default") == ("default", 0)
    assert parse_grading("revised:2") == ("revised", 2)


seeds = st.integers(0, 10**6)


@given(seeds, st.sampled_from(range(3)))
def test_limit_equals_truncation(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    r = {i: rng.randint(0, 2) for i in Q.vertices}
    x = random_point(Q, r, GF(7), rng)
    assert limit_zero(x) == truncate(x)


@given(seeds, st.sampled_from(range(3)))
def test_nonnegative_weights(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    x = random_point(Q, {i: 1 for i in Q.vertices}, QQ, rng)
    for blocks in act_gm(QQ(1), x, canonical_params(Q), formal=True).values():
        assert min(w for b in blocks for row in b for w in row) >= 0


@given(seeds, st.sampled_from(range(3)))
def test_group_automorphism_and_compatibility(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    F = GF(7)
    p = canonical_params(Q)
    r = {i: rng.randint(0, 2) for i in Q.vertices}
    g, h = random_group_elem(Q, r, F, rng), random_group_elem(Q, r, F, rng)
    x = random_point(Q, r, F, rng)
    t = rng.randint(1, 6)
    assert act_gm_group(t, g * h, p) == act_gm_group(t, g, p) * act_gm_group(t, h, p)
    assert act_gm(t, act(g, x), p) == act(act_gm_group(t, g, p), act_gm(t, x, p))
    assert limit_zero_group(g) == g.reduce()


@given(seeds, st.sampled_from(range(3)))
def test_one_parameter_composition(seed, k):
    rng = random.Random(seed)
    Q = varied_quivers()[k]
    F = QQ
    p = canonical_params(Q)
    x = random_point(Q, {i: 1 for i in Q.vertices}, F, rng)
    s, t = F(rng.randint(1, 5)), F(rng.randint(-5, -1))
    assert act_gm(t, act_gm(s, x, p), p) == act_gm(t * s, x, p)


def test_weight_zero_coordinates_give_truncation(rng):
    Q = kronecker((2, 3))
    x = random_point(Q, (2, 1), GF(5), rng)
    coords = thicken_coords(x)
    for key in zero_weight_keys(Q, canonical_params(Q)):
        assert coords[key] == [list(row) for row in truncate(x)[key[0]]]
