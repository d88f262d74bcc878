"""Unfolding into constant multiplicity ``M``, twisted by roots of unity.

Coefficients are moved into ``k_M = k[e_M]/(e_M^M)`` with ``e_{m} = e_M^{M/m}``.
The coefficient of ``x_a`` carrying source power ``s`` to target power ``g``
is placed at ``e_M^{g M/m_j + (f_ji - 1 - s) M/m_i}``; the copy on unfolded
arrow ``(a, n)`` is then twisted by ``n``, which multiplies the coefficient of
``e_M^d`` by ``zeta^(n d)``.  Group elements are twisted the same way at
vertex ``(i, n)``.

Exponents that reach ``M`` or beyond fall off the truncation.  This never
happens when ``f_ij = 1`` or ``f_ji = 1`` on every arrow.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg as la
from .errors import NoRoot, WrongOrder
from .fields import Field, PrimeField
from .quiver import QuiverWithMult, unfold_arrow_id, unfold_vertex_id, unfolded_quiver
from .rep import GroupElem, HomElem, RepPoint


@dataclass(frozen=True)
class RootOfUnity:
    field: Field
    zeta: object
    order: int

    def __post_init__(self):
        F, z, M = self.field, self.zeta, self.order
        if F.pow(z, M) != F.one or any(F.pow(z, d) == F.one for d in range(1, M)):
            raise WrongOrder(f"{F.render(z)} is not a primitive {M}th root of unity")

    def power(self, e: int):
        return self.field.pow(self.zeta, e % self.order)

    def to_dict(self) -> dict:
        return {"field": self.field.spec, "zeta": self.field.render(self.zeta), "order": self.order}


def primitive_root(M: int, F: Field) -> RootOfUnity:
    """The smallest primitive ``M``th root of unity in ``F``."""
    if M < 1:
        raise NoRoot("the order must be positive")
    if M == 1:
        return RootOfUnity(F, F.one, 1)
    if not isinstance(F, PrimeField):
        if M == 2:
            return RootOfUnity(F, F(-1), 2)
        raise NoRoot(f"the rationals contain no primitive {M}th root of unity")
    p = F.characteristic
    if (p - 1) % M:
        raise NoRoot(f"{M} does not divide {p - 1}")
    for z in range(2, p):
        if F.pow(z, M) == 1 and all(F.pow(z, d) != 1 for d in range(1, M)):
            return RootOfUnity(F, z, M)
    raise NoRoot(f"no primitive {M}th root of unity mod {p}")  # pragma: no cover


def unfold_exponent(Q: QuiverWithMult, aid: str, src_power: int, tgt_power: int) -> int:
    """Exponent of ``e_M`` receiving the ``(src_power -> tgt_power)`` coefficient."""
    a = Q.arrow[aid]
    M = Q.M
    return tgt_power * (M // Q.mult[a.target]) + (Q.f_ji(a) - 1 - src_power) * (M // Q.mult[a.source])


def formal_exponents(Q: QuiverWithMult) -> dict:
    """``(a, m, f1, f2) -> `` exponent, before truncation at ``M``."""
    out = {}
    for a in Q.arrows:
        for m in range(Q.m_ij(a)):
            for f1 in range(Q.f_ji(a)):
                for f2 in range(Q.f_ij(a)):
                    out[(a.id, m, f1, f2)] = unfold_exponent(Q, a.id, f1, m * Q.f_ij(a) + f2)
    return out


def is_injective_on(Q: QuiverWithMult) -> bool:
    """All formal exponents stay below ``M``, so no coefficient is lost."""
    return all(e < Q.M for e in formal_exponents(Q).values())


def unfolded_rank(Q: QuiverWithMult, r) -> dict:
    return {unfold_vertex_id(Q, i, n): r[i] for i in Q.vertices for n in range(Q.mult[i])}


def _check(Q: QuiverWithMult, zeta: RootOfUnity, F: Field) -> None:
    if zeta.order != Q.M:
        raise WrongOrder(f"need a root of order {Q.M}, got {zeta.order}")
    if zeta.field != F:
        raise WrongOrder("root of unity lives in a different field")


def _series(F: Field, M: int, rows: int, cols: int) -> list:
    return [la.zeros(rows, cols, F) for _ in range(M)]


def unfold_embed(x: RepPoint, zeta: RootOfUnity) -> RepPoint:
    """Point on the unfolded quiver with multiplicity ``M`` everywhere."""
    Q, F = x.quiver, x.field
    _check(Q, zeta, F)
    M = Q.M
    Qp = unfolded_quiver(Q)
    maps = {}
    for a in Q.arrows:
        h = x[a.id]
        ri, rj = h.ri, h.rj
        base = _series(F, M, rj, ri)
        for m in range(Q.m_ij(a)):
            for f1 in range(Q.f_ji(a)):
                for f2 in range(Q.f_ij(a)):
                    tgt = m * Q.f_ij(a) + f2
                    e = unfold_exponent(Q, a.id, f1, tgt)
                    if e < M:
                        base[e] = la.add(F, base[e], h.coefficient(f1, tgt))
        for n in range(Q.mu_ij(a)):
            blocks = tuple(la.scale(F, zeta.power(n * d), base[d]) for d in range(M))
            maps[unfold_arrow_id(Q, a.id, n)] = HomElem(F, M, M, ri, rj, blocks)
    return RepPoint.make(Qp, unfolded_rank(Q, x.r), F, maps)


def unfold_group_embed(g: GroupElem, zeta: RootOfUnity) -> GroupElem:
    """``g_i`` in ``k_{m_i}`` pushed to ``k_M`` and twisted by ``n`` at ``(i, n)``."""
    Q, F = g.quiver, g.field
    _check(Q, zeta, F)
    M = Q.M
    Qp = unfolded_quiver(Q)
    out = {}
    for i in Q.vertices:
        n_i = g.rank[i]
        step = M // Q.mult[i]
        for n in range(Q.mult[i]):
            cs = _series(F, M, n_i, n_i)
            for e, c in enumerate(g.g[i]):
                d = e * step
                cs[d] = la.scale(F, zeta.power(n * d), c)
            out[unfold_vertex_id(Q, i, n)] = cs
    return GroupElem.make(Qp, F, out)


def correspondence(Q: QuiverWithMult) -> dict:
    """Which unfolded vertices and arrows come from which original ones."""
    return {
        "vertices": {i: [unfold_vertex_id(Q, i, n) for n in range(Q.mult[i])] for i in Q.vertices},
        "arrows": {a.id: [unfold_arrow_id(Q, a.id, n) for n in range(Q.mu_ij(a))] for a in Q.arrows},
    }


def unfold_linear_map(Q: QuiverWithMult, r, zeta: RootOfUnity) -> list:
    """Matrix of ``x -> unfold_embed(x)`` in coordinates (columns indexed by ``x``)."""
    from .rep import point_from_coords, point_ncoords

    F = zeta.field
    n = point_ncoords(Q, r)
    cols = []
    for k in range(n):
        e = [F.zero] * n
        e[k] = F.one
        cols.append(unfold_embed(point_from_coords(Q, r, F, e), zeta).coords())
    if not cols:
        return []
    return [[cols[k][row] for k in range(n)] for row in range(len(cols[0]))]
