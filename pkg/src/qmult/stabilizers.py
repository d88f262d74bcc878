"""Endomorphism algebras and unipotent stabilisers of truncated points.

For a classical representation ``v`` and multiplicities ``m``, the
stabiliser of ``iota(v)`` in the unipotent radical decomposes along the
levels ``s = p / m_i`` in ``(0, 1)``.  At each level, the contribution is the
space of endomorphisms of ``v`` supported on the vertices where ``s m_i``
is an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import linalg as la
from .errors import Unsupported
from .fields import Field
from .quiver import QuiverWithMult, as_vector, is_generic, is_indivisible
from .rep import DEFAULT_GUARD, ClassicalRep, enumerate_classical, expand_full, section_iota
from .stability import enumerate_unipotent, king_semistable


def _end_system(v: ClassicalRep, support=None) -> tuple[list, list]:
    """Linear system ``xi_t v_a - v_a xi_s = 0`` restricted to ``support``."""
    Q, F = v.quiver, v.field
    d = v.d
    verts = [i for i in Q.vertices if d[i] and (support is None or i in support)]
    slots = [(i, p, q) for i in verts for p in range(d[i]) for q in range(d[i])]
    index = {s: k for k, s in enumerate(slots)}
    rows = []
    for a in Q.arrows:
        s, t = a.source, a.target
        if not d[s] or not d[t]:
            continue
        A = v[a.id]
        for p in range(d[t]):
            for q in range(d[s]):
                row = [F.zero] * len(slots)
                # (xi_t A)[p][q] = sum_k xi_t[p][k] A[k][q]
                if (t, p, 0) in index:
                    for k in range(d[t]):
                        row[index[(t, p, k)]] = F.red(row[index[(t, p, k)]] + A[k][q])
                # (A xi_s)[p][q] = sum_k A[p][k] xi_s[k][q]
                if (s, 0, q) in index:
                    for k in range(d[s]):
                        row[index[(s, k, q)]] = F.red(row[index[(s, k, q)]] - A[p][k])
                rows.append(row)
    return rows, slots


def _basis_from_kernel(v: ClassicalRep, rows: list, slots: list) -> list:
    F = v.field
    if not slots:
        return []
    ker = la.nullspace(F, rows, ncols=len(slots)) if rows else la.nullspace(F, [], ncols=len(slots))
    out = []
    for vec in ker:
        xi = {i: la.zeros(v.d[i], v.d[i], F) for i in v.quiver.vertices}
        for (i, p, q), c in zip(slots, vec):
            xi[i][p][q] = c
        out.append(xi)
    return out


def end_classical(v: ClassicalRep) -> list:
    """Basis of ``End(v)`` as tuples of matrices ``(xi_i)``."""
    rows, slots = _end_system(v)
    return _basis_from_kernel(v, rows, slots)


def end_supported(v: ClassicalRep, support) -> list:
    """Endomorphisms vanishing outside ``support``."""
    rows, slots = _end_system(v, set(support))
    return _basis_from_kernel(v, rows, slots)


def end_at_vertex(v: ClassicalRep, i: str) -> int:
    """``dim End(v)_i``: endomorphisms supported at the single vertex ``i``."""
    return len(end_supported(v, [i]))


def _stack(mats: list, ncols: int) -> list:
    return [row for M in mats for row in M] if mats else []


def jointly_injective(v: ClassicalRep, i: str) -> bool:
    """The outgoing maps at ``i`` have zero common kernel."""
    F, d = v.field, v.d
    outs = [v[a.id] for a in v.quiver.outgoing(i) if d[a.target]]
    if not d[i]:
        return True
    return la.rank(F, _stack(outs, d[i])) == d[i] if outs else False


def jointly_surjective(v: ClassicalRep, i: str) -> bool:
    """The images of the incoming maps span ``V_i``."""
    F, d = v.field, v.d
    if not d[i]:
        return True
    ins = [v[a.id] for a in v.quiver.incoming(i) if d[a.source]]
    if not ins:
        return False
    cols = [list(c) for A in ins for c in la.transpose(A)]
    return la.rank(F, cols) == d[i]


@dataclass(frozen=True)
class AdmissibleLevel:
    s: Fraction
    q: tuple  # ((vertex, s m_i), ...)
    support: tuple
    delta_level: bool

    def to_dict(self) -> dict:
        return {
            "s": f"{self.s.numerator}/{self.s.denominator}",
            "support": list(self.support),
            "delta_level": self.delta_level,
        }


def admissible_levels(Q: QuiverWithMult) -> list[AdmissibleLevel]:
    """All ``s = p / m_i`` strictly between 0 and 1, with their supports."""
    mult = Q.mult
    levels = sorted({Fraction(p, m) for m in mult.values() for p in range(1, m)})
    delta = Q.delta
    out = []
    for s in levels:
        q = tuple((i, s * mult[i]) for i in Q.vertices)
        support = tuple(i for i, qi in q if qi.denominator == 1)
        out.append(AdmissibleLevel(s, q, support, (s * delta).denominator == 1))
    return out


def _is_scalar_line(v: ClassicalRep, basis: list) -> bool:
    """Is ``span(basis)`` exactly the line of the identity tuple?"""
    F = v.field
    verts = [i for i in v.quiver.vertices if v.d[i]]
    if len(basis) != 1:
        return False
    xi = basis[0]
    c = None
    for i in verts:
        M = xi[i]
        s = M[0][0]
        if la.to_tuple(M) != la.to_tuple(la.scale(F, s, la.identity(v.d[i], F))):
            return False
        if c is None:
            c = s
        elif s != c:
            return False
    return c is not None and c != F.zero


def unip_stab(v: ClassicalRep, Q: QuiverWithMult | None = None) -> dict:
    """Closed form for the unipotent stabiliser of ``iota(v)``.

    Returns ``dim`` (so that the stabiliser has ``q^dim`` points over F_q),
    ``in_delta`` and the per-level contributions.
    """
    Q = Q or v.quiver
    vv = ClassicalRep.make(Q, v.d, v.field, v.v)
    per_level = []
    total = 0
    in_delta = True
    for lev in admissible_levels(Q):
        basis = end_supported(vv, lev.support)
        dim = len(basis)
        total += dim
        if lev.delta_level:
            if not _is_scalar_line(vv, basis):
                in_delta = False
        elif dim:
            in_delta = False
        entry = lev.to_dict()
        entry["dim"] = dim
        per_level.append(entry)
    return {"dim": total, "in_delta": in_delta, "per_level": per_level}


def stab_unipotent_bruteforce(v: ClassicalRep, Q: QuiverWithMult | None = None, guard: int = 2**20) -> int:
    """``|{u in U(F_q) : u . iota(v) = iota(v)}|`` by sweeping the unipotent radical."""
    Q = Q or v.quiver
    F = v.field
    if not F.is_finite:
        raise Unsupported("brute-force stabilisers need a finite field")
    x = section_iota(v, Q)
    maps = {a.id: expand_full(x[a.id]) for a in Q.arrows if x.r[a.source] and x.r[a.target]}
    count = 0
    for u in enumerate_unipotent(Q, x.r, F, guard):
        ok = True
        for aid, X in maps.items():
            a = Q.arrow[aid]
            lhs = la.matmul(F, u.expanded(a.target), X)
            rhs = la.matmul(F, X, u.expanded(a.source))
            if lhs != rhs:
                ok = False
                break
        if ok:
            count += 1
    return count


def stab_bruteforce(x, guard: int = 10**6) -> int:
    """``|Stab(x)|`` in the full group over F_q (any point, not just truncated ones)."""
    from .stability import enumerate_group

    F, Q = x.field, x.quiver
    maps = {a.id: expand_full(x[a.id]) for a in Q.arrows if x.r[a.source] and x.r[a.target]}
    count = 0
    for g in enumerate_group(Q, x.r, F, guard):
        if all(
            la.matmul(F, g.expanded(Q.arrow[aid].target), X) == la.matmul(F, X, g.expanded(Q.arrow[aid].source))
            for aid, X in maps.items()
        ):
            count += 1
    return count


def check_assumption_U(Q: QuiverWithMult, r, theta, F: Field, guard: int = DEFAULT_GUARD) -> dict:
    """Exhaustive scan: every theta-semistable ``v`` has unipotent stabiliser inside the scalars."""
    if not F.is_finite:
        raise Unsupported("the exhaustive scan needs a finite field")
    r = as_vector(Q, r, "rank")
    theta = as_vector(Q, theta, "theta")
    scanned = semistable = 0
    for v in enumerate_classical(Q, r, F, guard):
        scanned += 1
        if not king_semistable(v, theta).semistable:
            continue
        semistable += 1
        if not unip_stab(v, Q)["in_delta"]:
            return {
                "holds": False,
                "counterexample": {a: [[F.render(c) for c in row] for row in A] for a, A in v.map_items},
                "scanned": scanned,
                "semistable": semistable,
            }
    return {"holds": True, "counterexample": None, "scanned": scanned, "semistable": semistable}


def _neighbours_coprime(Q: QuiverWithMult) -> bool:
    return all(math.gcd(Q.mult[a.source], Q.mult[a.target]) == 1 for a in Q.arrows)


def sufficient_conditions(Q: QuiverWithMult, r, theta, F: Field | None = None, guard: int = DEFAULT_GUARD) -> dict:
    """Which of the three sufficient conditions for the scalar-stabiliser property apply.

    ``i``: ``r`` indivisible and ``theta`` generic.  ``ii``: every semistable
    truncation is stable (scanned over ``F``).  ``iii``: neighbours have
    coprime multiplicities and every semistable truncation is jointly
    injective or jointly surjective at each vertex (scanned over ``F``).
    Scanned items are ``None`` when no finite field is given.
    """
    r = as_vector(Q, r, "rank")
    theta = as_vector(Q, theta, "theta")
    cond_i = is_indivisible(r) and is_generic(theta, None, r) == "theta_generic"
    cond_ii = cond_iii = None
    if F is not None and F.is_finite:
        cond_ii = True
        coprime = _neighbours_coprime(Q)
        cond_iii = coprime
        for v in enumerate_classical(Q, r, F, guard):
            verdict = king_semistable(v, theta)
            if not verdict.semistable:
                continue
            if not verdict.stable:
                cond_ii = False
            if cond_iii and not all(
                jointly_injective(v, i) or jointly_surjective(v, i) for i in Q.vertices if r[i]
            ):
                cond_iii = False
            if not cond_ii and not cond_iii:
                break
    return {
        "i": cond_i,
        "ii": cond_ii,
        "iii": cond_iii,
        "applies": bool(cond_i or cond_ii or cond_iii),
    }


def levi_conjugate(v: ClassicalRep, gbar: Mapping) -> ClassicalRep:
    from .rep import act_classical

    return act_classical(gbar, v)


def random_classical(Q: QuiverWithMult, d, F: Field, rng) -> ClassicalRep:
    d = as_vector(Q, d, "dim")
    maps = {a.id: [[F.random(rng) for _ in range(d[a.source])] for _ in range(d[a.target])] for a in Q.arrows}
    return ClassicalRep.make(Q, d, F, maps)

