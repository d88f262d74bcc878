from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from qmult import linalg as la
from qmult.fields import GF, QQ


def test_rank_and_nullspace_over_f2():
    F = GF(2)
    A = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
    assert la.rank(F, A) == 2
    (v,) = la.nullspace(F, A)
    assert la.matvec(F, A, v) == [0, 0, 0]


def test_inverse_over_rationals():
    A = [[QQ(2), QQ(1)], [QQ(1), QQ(1)]]
    assert la.matmul(QQ, A, la.inverse(QQ, A)) == la.identity(2, QQ)


def test_solve_inconsistent_returns_none():
    F = GF(3)
    assert la.solve(F, [[1, 1], [1, 1]], [0, 1]) is None


def test_gaussian_binomial_matches_subspace_enumeration():
    for q, n in [(2, 3), (3, 2), (2, 4)]:
        F = GF(q)
        for k in range(n + 1):
            count = sum(1 for _ in la.enumerate_subspaces(F, n, k))
            assert count == la.gaussian_binomial(n, k, q)


def test_span_elements_counts():
    F = GF(3)
    basis = [[1, 0, 2], [0, 1, 1]]
    assert len(set(la.span_elements(F, basis, 3))) == 9


@given(st.lists(st.lists(st.integers(0, 4), min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_nullity(rows):
    F = GF(5)
    assert la.rank(F, rows) + len(la.nullspace(F, rows, ncols=3)) == 3


@given(st.lists(st.integers(0, 1), min_size=9, max_size=9))
def test_annihilator_kills_span(entries):
    F = GF(2)
    vecs = [entries[0:3], entries[3:6], entries[6:9]]
    basis = la.row_space_basis(F, vecs, 3)
    K = la.annihilator(F, basis, 3)
    for v in basis:
        assert not K or not any(la.matvec(F, K, v))
    assert len(K) + len(basis) == 3
