from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmult import linalg as la
from qmult.errors import AlphaNotOnLine, GammaNotInGl0, ShapeMismatch
from qmult.fields import GF, QQ
from qmult.grading import make_params
from qmult.quiver import QuiverWithMult, kronecker, opposite_quiver
from qmult.rep import HomElem, enumerate_points, random_group_elem, random_point, zero_point
from qmult.stability import semistable_mult
from qmult.symplectic import (
    CotangentPoint,
    LieElem,
    act_cotangent,
    act_gm_cotangent,
    act_gm_lie_revised,
    delta_lie_basis,
    doubled_params,
    equivariance_weights,
    in_gl0,
    infinitesimal_action,
    lie_from_expanded,
    lie_pairing,
    moment_fiber_solve,
    moment_linear_system,
    moment_map,
    point_pairing,
    random_cotangent,
    random_lie_elem,
    revised_beta,
    semistable_pi,
    semistable_pi_oracle,
    trace_pairing,
    zero_cotangent,
)

R11 = {"1": 1, "2": 1}


def test_pairing_m2_example():
    x = HomElem.from_coords(QQ, 2, 2, 1, 1, [QQ(2), QQ(3)])
    y = HomElem.from_coords(QQ, 2, 2, 1, 1, [QQ(5), QQ(7)])
    assert trace_pairing(x, y) == 2 * 7 + 3 * 5


def test_pairing_with_zero_and_shape_check():
    x = HomElem.from_coords(QQ, 2, 3, 1, 2, [QQ(k) for k in range(12)])
    assert trace_pairing(x, HomElem.zero(QQ, 3, 2, 2, 1)) == 0
    with pytest.raises(ShapeMismatch):
        trace_pairing(x, HomElem.zero(QQ, 2, 3, 1, 2))


def test_pairing_nondegenerate():
    F = GF(2)
    for mi, mj in itertools.product(range(1, 4), repeat=2):
        for ri, rj in itertools.product(range(1, 3), repeat=2):
            n = HomElem.zero(F, mi, mj, ri, rj).ncoords
            G = []
            for k in range(n):
                a = HomElem.from_coords(F, mi, mj, ri, rj, [int(t == k) for t in range(n)])
                G.append([trace_pairing(a, HomElem.from_coords(F, mj, mi, rj, ri, [int(t == c) for t in range(n)])) for c in range(n)])
            assert la.rank(F, G) == n


def test_loop_moment_map_vanishes(rng):
    Q = QuiverWithMult.build(["1"], [("a", "1", "1")], [3])
    for _ in range(5):
        assert moment_map(random_cotangent(Q, {"1": 1}, QQ, rng)).is_zero()


def test_moment_map_zero_on_zero_x(rng):
    Q = kronecker((2, 3))
    y = random_point(opposite_quiver(Q), (2, 1), QQ, rng)
    assert moment_map(CotangentPoint(zero_point(Q, (2, 1), QQ), y)).is_zero()


INSTANCES = [
    (kronecker((2, 3)), (1, 1)),
    (kronecker((2, 3)), (2, 1)),
    (kronecker((4, 6)), (1, 2)),
    (QuiverWithMult.build(["1", "2"], [("a", "1", "1"), ("b", "1", "2")], [2, 4]), (2, 1)),
]


@given(st.integers(0, 10**6), st.sampled_from(range(len(INSTANCES))))
def test_defining_property(seed, k):
    rng = random.Random(seed)
    Q, r = INSTANCES[k]
    p = random_cotangent(Q, r, QQ, rng)
    xi = random_lie_elem(Q, r, QQ, rng)
    mu = moment_map(p)
    assert point_pairing(infinitesimal_action(xi, p.x), p.y) == lie_pairing(xi, mu)
    assert in_gl0(mu)


@given(st.integers(0, 10**6), st.sampled_from(range(len(INSTANCES))))
def test_bilinearity(seed, k):
    rng = random.Random(seed)
    Q, r = INSTANCES[k]
    x = random_point(Q, r, QQ, rng)
    y1 = random_point(opposite_quiver(Q), r, QQ, rng)
    y2 = random_point(opposite_quiver(Q), r, QQ, rng)
    c = QQ(rng.randint(-4, 4))
    lhs = moment_map(CotangentPoint(x, y1 + y2.scaled(c)))
    rhs = moment_map(CotangentPoint(x, y1)) + _scaled(moment_map(CotangentPoint(x, y2)), c)
    assert lhs == rhs


def _scaled(xi: LieElem, c) -> LieElem:
    F = xi.field
    return LieElem.make(xi.quiver, F, {i: [la.scale(F, c, m) for m in cs] for i, cs in xi.item_coeffs})


@given(st.integers(0, 10**6), st.sampled_from(range(len(INSTANCES))))
def test_group_equivariance(seed, k):
    rng = random.Random(seed)
    Q, r = INSTANCES[k]
    F = GF(7)
    p = random_cotangent(Q, r, F, rng)
    g = random_group_elem(Q, r, F, rng)
    ginv = g.inverse()
    mu = moment_map(p)
    mats = {i: la.matmul(F, la.matmul(F, g.expanded(i), mu.expanded(i)), ginv.expanded(i)) for i in Q.vertices}
    assert moment_map(act_cotangent(g, p)) == lie_from_expanded(Q, F, mats, mu.rank)


@given(st.integers(0, 10**6), st.sampled_from([(2, 3), (4, 6), (3, 3), (1, 2)]))
def test_torus_equivariance_with_revised_beta(seed, m):
    rng = random.Random(seed)
    Q = kronecker(m)
    alpha = {i: Q.M // Q.mult[i] for i in Q.vertices}
    beta = revised_beta(Q, alpha, 1)
    p = random_cotangent(Q, (rng.randint(1, 2), rng.randint(1, 2)), QQ, rng)
    t = QQ(rng.choice([-3, -2, 2, 3, 5]))
    assert moment_map(act_gm_cotangent(t, p, alpha, beta)) == act_gm_lie_revised(t, moment_map(p), alpha, 1)


def test_equivariance_weight_example():
    Q = kronecker((2, 3), 1)
    alpha = {"1": 3, "2": 2}
    beta = revised_beta(Q, alpha, 1)
    assert beta == {"a": 3, "a*": 4}
    report = equivariance_weights(Q, alpha, beta, 1)
    assert report["weights"] == {"a": {"w_a": 3, "w_a*": 4}}
    assert report["is_revised"]


def test_constant_multiplicity_weights():
    Q = kronecker((3, 3), 1)
    report = equivariance_weights(Q, {"1": 1, "2": 1}, {"a": 2, "a*": 5})
    assert report["weights"]["a"] == {"w_a": 7, "w_a*": 7}


def test_alpha_off_line_rejected():
    with pytest.raises(AlphaNotOnLine):
        revised_beta(kronecker((2, 3)), {"1": 1, "2": 1})


@given(st.integers(0, 10**6), st.sampled_from([(2, 3), (4, 6), (2, 2)]), st.integers(0, 4), st.integers(0, 4))
def test_pairing_scaling(seed, m, extra_a, extra_b):
    rng = random.Random(seed)
    Q = kronecker(m, 1)
    alpha = {i: Q.M // Q.mult[i] for i in Q.vertices}
    (a,) = Q.arrows
    base = alpha["1"] * (Q.f_ji(a) - 1)
    beta = {"a": base + extra_a, "a*": alpha["2"] * (Q.f_ij(a) - 1) + extra_b}
    p = random_cotangent(Q, (rng.randint(1, 2), rng.randint(1, 2)), QQ, rng)
    t = QQ(rng.choice([2, 3, -2]))
    q = act_gm_cotangent(t, p, alpha, beta)
    exponent = alpha["1"] * Q.f_ji(a) * (Q.m_ij(a) - 1) + beta["a"] + beta["a*"]
    assert point_pairing(q.x, q.y) == t**exponent * point_pairing(p.x, p.y)


# fibres --------------------------------------------------------------------


def test_zero_fibres():
    Q = kronecker((2, 3))
    F = GF(3)
    x = zero_point(Q, R11, F)
    sol = moment_fiber_solve(x, LieElem.zero(Q, R11, F))
    assert sol.dimension == 12
    gamma = LieElem.scalar(Q, R11, F, {"1": [0, 1], "2": [0, 0, 2]})
    assert in_gl0(gamma)
    assert moment_fiber_solve(x, gamma).empty


def test_fibre_dimension_against_exhaustive_scan(rng):
    Q = kronecker((2, 3))
    F = GF(2)
    Qop = opposite_quiver(Q)
    ys = list(enumerate_points(Qop, R11, F))
    for _ in range(3):
        x = random_point(Q, R11, F, rng)
        sol = moment_fiber_solve(x, LieElem.zero(Q, R11, F))
        assert sol.dimension == 12 - la.rank(F, moment_linear_system(x))
        count = sum(1 for y in ys if moment_map(CotangentPoint(x, y)).is_zero())
        assert count == 2**sol.dimension


def test_fibre_solution_is_correct(rng):
    Q = kronecker((2, 2))
    F = GF(5)
    r = {"1": 1, "2": 2}
    for _ in range(5):
        x = random_point(Q, r, F, rng)
        y0 = random_point(opposite_quiver(Q), r, F, rng)
        gamma = moment_map(CotangentPoint(x, y0))
        sol = moment_fiber_solve(x, gamma)
        assert moment_map(CotangentPoint(x, sol.particular)) == gamma
        for k in sol.kernel:
            assert moment_map(CotangentPoint(x, k)).is_zero()


def test_scalar_gamma_accepted_iff_orthogonal_to_delta():
    Q = kronecker((2, 2))
    F = GF(3)
    r = {"1": 1, "2": 2}
    x = zero_point(Q, r, F)
    for c in itertools.product(range(3), repeat=4):
        gamma = LieElem.scalar(Q, r, F, {"1": c[:2], "2": c[2:]})
        expect = all(lie_pairing(b, gamma) == 0 for b in delta_lie_basis(Q, r, F))
        assert in_gl0(gamma) == expect
        if expect:
            moment_fiber_solve(x, gamma)
        else:
            with pytest.raises(GammaNotInGl0):
                moment_fiber_solve(x, gamma)


# modified stability --------------------------------------------------------


PI_PARAMS = [({"1": -1, "2": 1}, None), ({"1": 0, "2": 0}, {"1": -1, "2": 1}), ({"1": 0, "2": 0}, {"1": 1, "2": -1})]


def test_semistable_pi_matches_oracle():
    Q = kronecker((2, 2), 1)
    F = GF(2)
    for x in enumerate_points(Q, R11, F):
        for y in enumerate_points(opposite_quiver(Q), R11, F):
            p = CotangentPoint(x, y)
            for theta, rho in PI_PARAMS:
                assert semistable_pi(p, theta, rho).status == semistable_pi_oracle(p, theta, rho).status


def test_y_zero_reduces_to_ordinary(rng):
    Q = kronecker((2, 3))
    F = GF(2)
    for x in enumerate_points(Q, R11, F):
        p = CotangentPoint(x, zero_point(opposite_quiver(Q), R11, F))
        for theta, rho in PI_PARAMS:
            assert semistable_pi(p, theta, rho).status == semistable_mult(x, theta, rho).status


@given(st.integers(0, 10**6))
def test_semistable_pi_group_invariant(seed):
    rng = random.Random(seed)
    Q = kronecker((2, 2))
    F = GF(3)
    p = random_cotangent(Q, R11, F, rng)
    g = random_group_elem(Q, R11, F, rng)
    for theta, rho in PI_PARAMS:
        assert semistable_pi(act_cotangent(g, p), theta, rho).status == semistable_pi(p, theta, rho).status


def test_doubled_round_trip(rng):
    Q = kronecker((2, 3))
    p = random_cotangent(Q, (2, 1), QQ, rng)
    assert CotangentPoint.from_doubled(Q, p.doubled()) == p
    assert zero_cotangent(Q, (1, 1), QQ).x.is_zero()


def test_doubled_params_use_starred_beta():
    Q = kronecker((2, 3), 1)
    px, py = doubled_params(Q, {"1": 3, "2": 2}, {"a": 3, "a*": 4})
    assert px == make_params(Q, {"1": 3, "2": 2})
    assert py.b == {"a*": 4}
