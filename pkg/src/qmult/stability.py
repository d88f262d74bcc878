"""Stability tests for classical representations and representations with multiplicities.

Conventions: a subobject ``N`` destabilises when ``theta . dim N < 0``.  The
multiplicity test has two conditions.  The first is King's condition on the
truncation; the second scans free subrepresentations with ``theta . rk = 0``
against ``rho``.  A :class:`Verdict` is one of ``stable``,
``strictly_semistable`` or ``unstable``, with a witness whenever it is not
``stable``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from . import linalg as la
from .errors import NotSemistable, ThetaNotOrthogonal, TooLarge, Unsupported
from .fields import Field
from .quiver import QuiverWithMult, as_vector, dot, subvectors
from .rep import (
    DEFAULT_GUARD,
    ClassicalRep,
    FreeSubmodule,
    GroupElem,
    HomElem,
    RepPoint,
    act,
    count_free_submodules,
    enumerate_free_submodules,
    expand_full,
    expand_kmat,
    is_eps_stable,
    kmat_mul,
    sigma_twist,
    submodule_rank,
    thicken_coords,
    truncate,
)

STABLE = "stable"
STRICT = "strictly_semistable"
UNSTABLE = "unstable"
_ORDER = {UNSTABLE: 0, STRICT: 1, STABLE: 2}


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: object = None
    reason: str = ""

    @property
    def semistable(self) -> bool:
        return self.status != UNSTABLE

    @property
    def stable(self) -> bool:
        return self.status == STABLE

    def to_dict(self) -> dict:
        out = {"verdict": self.status}
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def meet(a: Verdict, b: Verdict) -> Verdict:
    """The weaker of two verdicts (the reduction used when scans are split)."""
    return a if _ORDER[a.status] <= _ORDER[b.status] else b


def _check_orthogonal(name: str, vec: Mapping, r: Mapping) -> None:
    if dot(vec, r) != 0:
        raise ThetaNotOrthogonal(f"{name} . r = {dot(vec, r)} != 0")


def _proper(sub: Mapping, total: Mapping) -> bool:
    return any(sub.values()) and dict(sub) != dict(total)


# graded subspace scans -------------------------------------------------------


def _closed(F: Field, maps: Sequence, bases: Mapping, annihilators: Mapping) -> bool:
    """Is the graded subspace closed under every ``(source, target, matrix)``?"""
    for s, t, A in maps:
        Bs = bases[s]
        if not Bs:
            continue
        K = annihilators[t]
        if not K:
            continue
        KA = la.matmul(F, K, A)
        for b in Bs:
            if any(la.matvec(F, KA, b)):
                return False
    return True


def _search_graded(
    F: Field,
    vertices: Sequence[str],
    maps: Sequence,
    candidates: Mapping,
) -> Iterator[dict]:
    """Depth-first product of per-vertex candidate subspaces with early closure checks.

    ``candidates[i]`` is a list of ``(basis, annihilator)``; ``maps`` are
    ``(source, target, matrix)``.  Yields ``{vertex: index into candidates}``.
    """
    order = list(vertices)
    pos = {v: k for k, v in enumerate(order)}
    ready = [[] for _ in order]
    for s, t, A in maps:
        ready[max(pos[s], pos[t])].append((s, t, A))
    chosen: dict = {}
    bases: dict = {}
    anns: dict = {}

    def rec(k: int):
        if k == len(order):
            yield dict(chosen)
            return
        v = order[k]
        for idx, (B, K) in enumerate(candidates[v]):
            chosen[v], bases[v], anns[v] = idx, B, K
            if _closed(F, ready[k], bases, anns):
                yield from rec(k + 1)
        chosen.pop(v, None)
        bases.pop(v, None)
        anns.pop(v, None)

    yield from rec(0)


@functools.lru_cache(maxsize=256)
def _subspaces_with_ann(F: Field, n: int, k: int) -> tuple:
    out = []
    for B in la.enumerate_subspaces(F, n, k):
        out.append((tuple(tuple(b) for b in B), tuple(tuple(r) for r in la.annihilator(F, B, n))))
    return tuple(out)


def _classical_maps(v: ClassicalRep) -> list:
    return [(a.source, a.target, v[a.id]) for a in v.quiver.arrows if v.d[a.source] and v.d[a.target]]


def subrepresentations(v: ClassicalRep, dims: Mapping, guard: int = DEFAULT_GUARD) -> Iterator[dict]:
    """Closed graded subspaces of dimension vector ``dims`` (finite fields)."""
    F, Q = v.field, v.quiver
    total = 1
    for i in Q.vertices:
        total *= la.gaussian_binomial(v.d[i], dims[i], F.order)
    if total > guard:
        raise TooLarge(f"{total} graded subspaces exceed the guard {guard}")
    cands = {i: _subspaces_with_ann(F, v.d[i], dims[i]) for i in Q.vertices}
    for choice in _search_graded(F, Q.vertices, _classical_maps(v), cands):
        yield {i: [list(b) for b in cands[i][choice[i]][0]] for i in Q.vertices}


def _witness_sub(kind: str, sub: Mapping, F: Field) -> dict:
    return {
        "kind": kind,
        "dims": {i: len(B) for i, B in sub.items()},
        "basis": {i: [[F.render(c) for c in b] for b in B] for i, B in sub.items()},
    }


def king_semistable(v: ClassicalRep, theta, guard: int = DEFAULT_GUARD) -> Verdict:
    """King's test: every proper nonzero subrepresentation has ``theta . dim >= 0``."""
    Q, F = v.quiver, v.field
    theta = as_vector(Q, theta, "theta")
    d = v.d
    _check_orthogonal("theta", theta, d)
    if not F.is_finite:
        return _king_rational(v, theta)
    strict = None
    dims_list = sorted(
        (s for s in subvectors(d) if _proper(s, d) and dot(s, theta) <= 0), key=lambda s: dot(s, theta)
    )
    for dims in dims_list:
        for sub in subrepresentations(v, dims, guard):
            if dot(dims, theta) < 0:
                return Verdict(UNSTABLE, _witness_sub("subrepresentation", sub, F), "theta . dim < 0")
            if strict is None:
                strict = sub
            break
    if strict is not None:
        return Verdict(STRICT, _witness_sub("subrepresentation", strict, F), "theta . dim = 0")
    return Verdict(STABLE)


def _closure(F: Field, v: ClassicalRep, gens: Mapping) -> dict:
    """Smallest subrepresentation containing the given vectors."""
    Q = v.quiver
    basis = {i: la.row_space_basis(F, gens.get(i, []), v.d[i]) for i in Q.vertices}
    changed = True
    while changed:
        changed = False
        for a in Q.arrows:
            if not basis[a.source] or not v.d[a.target]:
                continue
            imgs = [la.matvec(F, v[a.id], b) for b in basis[a.source]]
            new = la.row_space_basis(F, basis[a.target] + imgs, v.d[a.target])
            if len(new) > len(basis[a.target]):
                basis[a.target] = new
                changed = True
    return basis


def _king_rational(v: ClassicalRep, theta: Mapping) -> Verdict:
    Q, F = v.quiver, v.field
    d = v.d
    if all(x <= 1 for x in d.values()):
        # every graded subspace is a set of vertices
        support = [i for i in Q.vertices if d[i]]
        strict = None
        for k in range(1, len(support)):
            for S in itertools.combinations(support, k):
                sub = {i: ([[F.one]] if i in S else []) for i in Q.vertices}
                if not _closed(F, _classical_maps(v), sub, {i: la.annihilator(F, sub[i], d[i]) for i in Q.vertices}):
                    continue
                val = sum(theta[i] for i in S)
                if val < 0:
                    return Verdict(UNSTABLE, _witness_sub("subrepresentation", sub, F), "theta . dim < 0")
                if val == 0 and strict is None:
                    strict = sub
        if strict is not None:
            return Verdict(STRICT, _witness_sub("subrepresentation", strict, F), "theta . dim = 0")
        return Verdict(STABLE)
    # lattice of subrepresentations generated by kernels and single vectors
    gens = []
    for i in Q.vertices:
        for c in range(d[i]):
            e = [F.zero] * d[i]
            e[c] = F.one
            gens.append({i: [e]})
        outs = [v[a.id] for a in Q.outgoing(i) if d[a.target]]
        if outs and d[i]:
            for k in la.nullspace(F, [row for A in outs for row in A], ncols=d[i]):
                gens.append({i: [k]})
    seen: dict = {}
    for g in gens:
        sub = _closure(F, v, g)
        seen[_key(sub)] = sub
    frontier = list(seen.values())
    for _ in range(3):
        new = []
        items = list(seen.values())
        for A in frontier:
            for B in items:
                s = _closure(F, v, {i: A[i] + B[i] for i in Q.vertices})
                if _key(s) not in seen:
                    seen[_key(s)] = s
                    new.append(s)
        frontier = new
        if not frontier:
            break
    strict = None
    for sub in seen.values():
        dims = {i: len(sub[i]) for i in Q.vertices}
        if not _proper(dims, d):
            continue
        val = dot(dims, theta)
        if val < 0:
            return Verdict(UNSTABLE, _witness_sub("subrepresentation", sub, F), "theta . dim < 0")
        if val == 0 and strict is None:
            strict = sub
    if all(t == 0 for t in theta.values()) and strict is not None:
        return Verdict(STRICT, _witness_sub("subrepresentation", strict, F), "theta . dim = 0")
    raise Unsupported("rational search is inconclusive; use a prime field")


def _key(sub: Mapping) -> tuple:
    return tuple(sorted((i, tuple(map(tuple, B))) for i, B in sub.items()))


# free subrepresentations -----------------------------------------------------


@functools.lru_cache(maxsize=256)
def _free_candidates(F: Field, m: int, r: int, rp: int, guard: int) -> tuple:
    out = []
    for N in enumerate_free_submodules(m, r, rp, F, guard):
        B = N.basis()
        K = la.annihilator(F, B, m * r)
        out.append((tuple(map(tuple, B)), tuple(map(tuple, K)), N))
    return tuple(out)


def _point_maps(x: RepPoint) -> list:
    Q = x.quiver
    return [(a.source, a.target, expand_full(x[a.id])) for a in Q.arrows if x.r[a.source] and x.r[a.target]]


def free_subrepresentations(x: RepPoint, ranks: Mapping, guard: int = DEFAULT_GUARD) -> Iterator[dict]:
    """Families of free submodules of the given ranks that ``x`` maps into each other."""
    Q, F = x.quiver, x.field
    total = 1
    for i in Q.vertices:
        total *= count_free_submodules(Q.mult[i], x.r[i], ranks[i], F.order)
    if total > guard:
        raise TooLarge(f"{total} free submodule families exceed the guard {guard}")
    cands = {
        i: [(B, K) for B, K, _ in _free_candidates(F, Q.mult[i], x.r[i], ranks[i], guard)] for i in Q.vertices
    }
    full = {i: _free_candidates(F, Q.mult[i], x.r[i], ranks[i], guard) for i in Q.vertices}
    for choice in _search_graded(F, Q.vertices, _point_maps(x), cands):
        yield {i: full[i][choice[i]][2] for i in Q.vertices}


def _witness_free(fam: Mapping, F: Field) -> dict:
    return {
        "kind": "free_subrepresentation",
        "ranks": {i: N.rank for i, N in fam.items()},
        "generators": {
            i: [[[F.render(c) for c in row] for row in A] for A in N.coeffs] for i, N in fam.items()
        },
    }


def condition_two(x: RepPoint, theta: Mapping, rho: Mapping, guard: int = DEFAULT_GUARD) -> Verdict:
    """The ``rho`` scan over free subrepresentations with ``theta . rk = 0``."""
    F = x.field
    r = x.r
    strict = None
    ranks_list = [s for s in subvectors(r) if _proper(s, r) and dot(s, theta) == 0]
    ranks_list.sort(key=lambda s: dot(s, rho))
    for ranks in ranks_list:
        val = dot(ranks, rho)
        if val > 0:
            break
        for fam in free_subrepresentations(x, ranks, guard):
            if val < 0:
                return Verdict(UNSTABLE, _witness_free(fam, F), "rho . rk < 0 on a free subrepresentation")
            strict = fam
            break
        if strict is not None:
            return Verdict(STRICT, _witness_free(strict, F), "rho . rk = 0 on a free subrepresentation")
    return Verdict(STABLE)


def semistable_mult(x: RepPoint, theta, rho=None, guard: int = DEFAULT_GUARD, king_cache: dict | None = None) -> Verdict:
    """``(theta, rho)``-stability: King on the truncation, then the free ``rho`` scan.

    ``king_cache`` (a dict keyed by the truncation's coordinates) lets
    callers reuse condition-one verdicts across many points.
    """
    Q = x.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    _check_orthogonal("theta", theta, x.r)
    _check_orthogonal("rho", rho, x.r)
    v = truncate(x)
    if king_cache is not None:
        key = v.coords()
        k = king_cache.get(key)
        if k is None:
            k = king_cache[key] = king_semistable(v, theta, guard)
    else:
        k = king_semistable(v, theta, guard)
    if not k.semistable:
        return Verdict(UNSTABLE, k.witness, "truncation is theta-unstable")
    return condition_two(x, theta, rho, guard)


# direct oracle ---------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _eps_stable_subspaces(F: Field, m: int, r: int) -> tuple:
    out = []
    n = m * r
    for B in la.enumerate_subspaces(F, n):
        if is_eps_stable(F, B, m, r):
            rk = submodule_rank(F, B, m, r)
            out.append((tuple(map(tuple, B)), tuple(map(tuple, la.annihilator(F, B, n))), rk, len(B) == m * rk))
    return tuple(out)


def _direct_subspaces(x: RepPoint, guard: int) -> dict:
    Q, F, r = x.quiver, x.field, x.r
    total = 1
    for i in Q.vertices:
        total *= sum(la.gaussian_binomial(Q.mult[i] * r[i], k, F.order) for k in range(Q.mult[i] * r[i] + 1))
    if total > guard:
        raise TooLarge(f"{total} graded subspaces exceed the oracle guard {guard}")
    return {i: _eps_stable_subspaces(F, Q.mult[i], r[i]) for i in Q.vertices}


def direct_condition_one(x: RepPoint, theta: Mapping, guard: int = 2**16) -> Verdict:
    """Every e-stable graded subspace closed under the twisted maps has ``theta . rk >= 0``."""
    Q, F, r = x.quiver, x.field, x.r
    subs = _direct_subspaces(x, guard)
    cands = {i: [(B, K) for B, K, _, _ in subs[i]] for i in Q.vertices}
    for choice in _search_graded(F, Q.vertices, _point_maps(sigma_twist(x)), cands):
        rk = {i: subs[i][choice[i]][2] for i in Q.vertices}
        if _proper(rk, r) and all(rk[i] <= r[i] for i in Q.vertices) and dot(rk, theta) < 0:
            sub = {i: [list(b) for b in subs[i][choice[i]][0]] for i in Q.vertices}
            return Verdict(UNSTABLE, _witness_sub("twisted_submodule", sub, F), "theta . rk < 0")
    return Verdict(STABLE)


def direct_condition_two(x: RepPoint, theta: Mapping, rho: Mapping, guard: int = 2**16) -> Verdict:
    """The ``rho`` test over every free graded subspace closed under ``x`` with ``theta . rk = 0``."""
    Q, F, r = x.quiver, x.field, x.r
    subs = _direct_subspaces(x, guard)
    free = {i: [(B, K) for B, K, _, fr in subs[i] if fr] for i in Q.vertices}
    free_rk = {i: [rk for _, _, rk, fr in subs[i] if fr] for i in Q.vertices}
    strict = None
    for choice in _search_graded(F, Q.vertices, _point_maps(x), free):
        rk = {i: free_rk[i][choice[i]] for i in Q.vertices}
        if not _proper(rk, r) or dot(rk, theta) != 0:
            continue
        val = dot(rk, rho)
        sub = {i: [list(b) for b in free[i][choice[i]][0]] for i in Q.vertices}
        if val < 0:
            return Verdict(UNSTABLE, _witness_sub("free_submodule", sub, F), "rho . rk < 0")
        if val == 0 and strict is None:
            strict = sub
    if strict is not None:
        return Verdict(STRICT, _witness_sub("free_submodule", strict, F), "rho . rk = 0")
    return Verdict(STABLE)


def semistable_direct_oracle(x: RepPoint, theta, rho=None, guard: int = 2**16) -> Verdict:
    """Stability straight from the definition, by enumerating every submodule.

    Condition one ranges over all e-stable graded subspaces closed under
    the twisted maps; condition two over the free ones closed under ``x``.
    """
    Q = x.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    _check_orthogonal("theta", theta, x.r)
    _check_orthogonal("rho", rho, x.r)
    first = direct_condition_one(x, theta, guard)
    if not first.semistable:
        return first
    return direct_condition_two(x, theta, rho, guard)


# filtrations and the Hilbert-Mumford pairing ---------------------------------


@dataclass(frozen=True)
class GradedFiltration:
    """Descending filtration ``V^p`` of ``k^r`` given by its jumps.

    ``steps`` is a list of ``(p_k, V_k)`` with ``p`` strictly decreasing and
    ``V_k`` (a dict of per-vertex bases) increasing; the last ``V`` is the
    whole space.  ``l`` is the weight on the grading factor.
    """

    steps: tuple
    l: int = 0

    def at(self, p: int) -> dict | None:
        """``V^p``; ``None`` stands for the zero subspace."""
        chosen = None
        for pk, V in self.steps:
            if pk >= p:
                chosen = V
            else:
                break
        return chosen

    @classmethod
    def two_step(cls, V: Mapping, whole: Mapping, l: int = 0) -> "GradedFiltration":
        return cls(((0, dict(V)), (-1, dict(whole))), l)


def _dims(V: Mapping | None, vertices) -> dict:
    return {i: (len(V[i]) if V else 0) for i in vertices}


def hm_pairing(filt: GradedFiltration, theta, rho, n: int = 0) -> int:
    """``sum_p rho . dim V^p + l n`` (``theta`` is accepted for symmetry and unused)."""
    del theta
    steps = filt.steps
    total = 0
    for k in range(len(steps) - 1):
        pk, V = steps[k]
        gap = pk - steps[k + 1][0]
        total += gap * sum(rho.get(i, 0) * len(V[i]) for i in V)
    return total + filt.l * n


def limit_exists(x: RepPoint, filt: GradedFiltration, weights: Mapping) -> bool:
    """``l >= 0`` and every thickened coordinate maps ``V^p`` into ``V^{p - l wt}``."""
    if filt.l < 0:
        return False
    Q, F = x.quiver, x.field
    coords = thicken_coords(x)
    for key, A in coords.items():
        a = Q.arrow[key[0]]
        if not A or not A[0]:
            continue
        wt = weights[key]
        for pk, V in filt.steps:
            src = V[a.source]
            if not src:
                continue
            tgt = filt.at(pk - filt.l * wt)
            tb = tgt[a.target] if tgt else []
            K = la.annihilator(F, tb, x.r[a.target])
            if not K:
                continue
            for b in src:
                if any(la.matvec(F, K, la.matvec(F, A, b))):
                    return False
    return True


def hm_semistable(x: RepPoint, theta, rho=None, guard: int = 2**20) -> Verdict:
    """Stability via the Hilbert-Mumford description of the unipotent sweep.

    ``x`` is semistable when its truncation is and, for every ``u`` in the
    unipotent radical, every graded ``V`` with ``theta . dim V = 0`` whose
    two-step filtration (``l = 0``) has a limit at ``u . x`` satisfies
    ``rho . dim V >= 0``.
    """
    Q, F = x.quiver, x.field
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    r = x.r
    _check_orthogonal("theta", theta, r)
    _check_orthogonal("rho", rho, r)
    k = king_semistable(truncate(x), theta)
    if not k.semistable:
        return Verdict(UNSTABLE, k.witness, "truncation is theta-unstable")
    from .grading import canonical_params, weight_table

    weights = weight_table(Q, r, canonical_params(Q))
    whole = {i: [list(row) for row in la.identity(r[i], F)] for i in Q.vertices}
    rank_list = [s for s in subvectors(r) if _proper(s, r) and dot(s, theta) == 0]
    spaces = []
    for dims in rank_list:
        for combo in itertools.product(*(list(la.enumerate_subspaces(F, r[i], dims[i])) for i in Q.vertices)):
            spaces.append(dict(zip(Q.vertices, combo)))
    strict = None
    for u in enumerate_unipotent(Q, r, F, guard):
        y = act(u, x)
        for V in spaces:
            filt = GradedFiltration.two_step(V, whole)
            if not limit_exists(y, filt, weights):
                continue
            val = hm_pairing(filt, theta, rho)
            if val < 0:
                return Verdict(UNSTABLE, _witness_sub("filtration", V, F), "negative pairing")
            if val == 0 and strict is None:
                strict = V
    if strict is not None:
        return Verdict(STRICT, _witness_sub("filtration", strict, F), "zero pairing")
    return Verdict(STABLE)


def enumerate_unipotent(Q: QuiverWithMult, r, F: Field, guard: int = 2**20) -> Iterator[GroupElem]:
    """Every element of the unipotent radical over a finite field."""
    r = as_vector(Q, r, "rank")
    n = sum((Q.mult[i] - 1) * r[i] ** 2 for i in Q.vertices)
    if F.order**n > guard:
        raise TooLarge(f"{F.order}^{n} unipotent elements exceed the guard {guard}")
    for vals in itertools.product(range(F.order), repeat=n):
        it = iter(vals)
        g = {}
        for i in Q.vertices:
            ri = r[i]
            cs = [la.identity(ri, F)]
            for _ in range(Q.mult[i] - 1):
                cs.append([[next(it) for _ in range(ri)] for _ in range(ri)])
            g[i] = cs
        yield GroupElem.make(Q, F, g)


def enumerate_group(Q: QuiverWithMult, r, F: Field, guard: int = 10**6) -> Iterator[GroupElem]:
    """Every element of the full group over a finite field."""
    r = as_vector(Q, r, "rank")
    from .census import group_order

    if group_order(Q, r, F.order)["gl"] > guard:
        raise TooLarge("group too large to enumerate")
    per_vertex = []
    for i in Q.vertices:
        ri = r[i]
        units = [
            g0
            for g0 in (
                [list(vals[k * ri : (k + 1) * ri]) for k in range(ri)]
                for vals in itertools.product(range(F.order), repeat=ri * ri)
            )
            if ri == 0 or la.rank(F, g0) == ri
        ]
        rest = list(itertools.product(range(F.order), repeat=(Q.mult[i] - 1) * ri * ri))
        opts = []
        for g0 in units:
            for vals in rest:
                it = iter(vals)
                cs = [g0] + [[[next(it) for _ in range(ri)] for _ in range(ri)] for _ in range(Q.mult[i] - 1)]
                opts.append(cs)
        per_vertex.append(opts)
    for combo in itertools.product(*per_vertex):
        yield GroupElem.make(Q, F, dict(zip(Q.vertices, combo)))


# sub- and quotient representations ------------------------------------------


def restrict_hom(h: HomElem, src: Sequence[int], tgt: Sequence[int]) -> HomElem:
    """Keep source copies ``src`` and target copies ``tgt`` of every sub-block."""
    blocks = []
    for b in h.blocks:
        rows = [p * h.rj + s for p in range(h.f_ij) for s in tgt]
        cols = [q * h.ri + c for q in range(h.f_ji) for c in src]
        blocks.append(tuple(tuple(b[i][j] for j in cols) for i in rows))
    return HomElem(h.field, h.mi, h.mj, len(src), len(tgt), tuple(blocks))


def restrict_point(x: RepPoint, copies: Mapping) -> RepPoint:
    Q = x.quiver
    maps = {a.id: restrict_hom(x[a.id], copies[a.source], copies[a.target]) for a in Q.arrows}
    return RepPoint.make(Q, {i: len(copies[i]) for i in Q.vertices}, x.field, maps)


def direct_sum(parts: Sequence[RepPoint]) -> RepPoint:
    """Block-diagonal direct sum, copies ordered part by part."""
    Q, F = parts[0].quiver, parts[0].field
    r = {i: sum(p.r[i] for p in parts) for i in Q.vertices}
    maps = {}
    for a in Q.arrows:
        mi, mj = Q.mult[a.source], Q.mult[a.target]
        h0 = HomElem.zero(F, mi, mj, r[a.source], r[a.target])
        blocks = [la.to_list(b) for b in h0.blocks]
        so = to = 0
        for p in parts:
            h = p[a.id]
            for l, b in enumerate(h.blocks):
                for pp in range(h.f_ij):
                    for s in range(h.rj):
                        for qq in range(h.f_ji):
                            for c in range(h.ri):
                                blocks[l][pp * r[a.target] + to + s][qq * r[a.source] + so + c] = b[pp * h.rj + s][
                                    qq * h.ri + c
                                ]
            so += p.r[a.source]
            to += p.r[a.target]
        maps[a.id] = HomElem(F, mi, mj, r[a.source], r[a.target], tuple(blocks))
    return RepPoint.make(Q, r, F, maps)


def _adapted_basis(F: Field, N: FreeSubmodule) -> tuple[list, list]:
    """Coefficient matrices of ``g = [A | C]`` with ``C`` standard vectors on non-pivot rows."""
    A = N.coeffs
    r, rp = N.r, N.rank
    A0 = [list(row) for row in A[0]] if rp else [[] for _ in range(r)]
    pivots, rows = [], []
    for i in range(r):
        if rp and la.rank(F, rows + [A0[i]]) > len(rows):
            rows.append(A0[i])
            pivots.append(i)
    others = [i for i in range(r) if i not in pivots]
    g = []
    for d in range(N.m):
        M = la.zeros(r, r, F)
        for i in range(r):
            for c in range(rp):
                M[i][c] = A[d][i][c]
        if d == 0:
            for k, i in enumerate(others):
                M[i][rp + k] = F.one
        g.append(M)
    return g, others


@dataclass
class JHResult:
    factors: list
    steps: list = field(default_factory=list)  # increasing families of k_m-generator coefficients

    @property
    def graded(self) -> RepPoint:
        return direct_sum(self.factors)


def _split(x: RepPoint, fam: Mapping) -> tuple[RepPoint, RepPoint, GroupElem]:
    Q, F = x.quiver, x.field
    g = {}
    for i in Q.vertices:
        gi, _ = _adapted_basis(F, fam[i])
        g[i] = gi
    G = GroupElem.make(Q, F, g)
    xp = act(G.inverse(), x)
    sub = {i: list(range(fam[i].rank)) for i in Q.vertices}
    quo = {i: list(range(fam[i].rank, x.r[i])) for i in Q.vertices}
    return restrict_point(xp, sub), restrict_point(xp, quo), G


def _lift(F: Field, G: GroupElem, fam: Mapping, steps_q: Sequence, Q: QuiverWithMult) -> list:
    """Preimages of quotient steps, in the original coordinates."""
    out = []
    for step in steps_q:
        fam_out = {}
        for i in Q.vertices:
            m, rp = Q.mult[i], fam[i].rank
            B = step[i]
            r = len(G.g[i][0])
            s = len(B[0][0]) if B and B[0] else 0
            blk = []
            for d in range(m):
                M = la.zeros(r, rp + s, F)
                if d == 0:
                    for c in range(rp):
                        M[c][c] = F.one
                for rr in range(r - rp):
                    for c in range(s):
                        M[rp + rr][rp + c] = B[d][rr][c]
                blk.append(M)
            fam_out[i] = kmat_mul(F, G.g[i], blk, m)
        out.append(fam_out)
    return out


def _jh_all(x: RepPoint, theta, rho, guard: int, first_only: bool) -> Iterator[JHResult]:
    Q, F = x.quiver, x.field
    r = x.r
    ranks_list = sorted(
        (s for s in subvectors(r) if _proper(s, r) and dot(s, theta) == 0 and dot(s, rho) == 0),
        key=lambda s: sum(s.values()),
    )
    found = False
    for ranks in ranks_list:
        for fam in free_subrepresentations(x, ranks, guard):
            sub, quo, G = _split(x, fam)
            if not semistable_mult(sub, theta, rho, guard).stable:
                continue
            if not semistable_mult(quo, theta, rho, guard).semistable:
                continue
            for tail in _jh_all(quo, theta, rho, guard, first_only):
                found = True
                steps = [{i: fam[i].coeffs for i in Q.vertices}] + _lift(F, G, fam, tail.steps, Q)
                yield JHResult([sub] + tail.factors, steps)
                if first_only:
                    return
    if not found:
        yield JHResult([x], [])


def jh_filtration(x: RepPoint, theta, rho=None, guard: int = DEFAULT_GUARD) -> JHResult:
    """A naive Jordan-Hoelder filtration found by recursive search over free subrepresentations."""
    Q = x.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    if not semistable_mult(x, theta, rho, guard).semistable:
        raise NotSemistable("point is not semistable")
    return next(_jh_all(x, theta, rho, guard, True))


def hom_space(x: RepPoint, y: RepPoint) -> list:
    """Basis of ``{phi : phi_t x_a = y_a phi_s}``, each ``phi`` a dict of ``k_m``-coefficient lists."""
    Q, F = x.quiver, x.field
    slots = [(i, d, p, q) for i in Q.vertices for d in range(Q.mult[i]) for p in range(y.r[i]) for q in range(x.r[i])]

    def build(vec) -> dict:
        phi = {i: [la.zeros(y.r[i], x.r[i], F) for _ in range(Q.mult[i])] for i in Q.vertices}
        for (i, d, p, q), val in zip(slots, vec):
            phi[i][d][p][q] = val
        return phi

    def residual(phi) -> list:
        out = []
        for a in Q.arrows:
            s, t = a.source, a.target
            Ps = expand_kmat(F, phi[s], Q.mult[s], y.r[s], x.r[s])
            Pt = expand_kmat(F, phi[t], Q.mult[t], y.r[t], x.r[t])
            X, Y = expand_full(x[a.id]), expand_full(y[a.id])
            if x.r[s] and y.r[t]:
                lhs = la.matmul(F, Pt, X, inner=Q.mult[t] * x.r[t])
                rhs = la.matmul(F, Y, Ps, inner=Q.mult[s] * y.r[s])
                out.extend(c for row in la.sub(F, lhs, rhs) for c in row)
        return out

    cols = []
    for k in range(len(slots)):
        e = [F.zero] * len(slots)
        e[k] = F.one
        cols.append(residual(build(e)))
    if not cols or not cols[0]:
        basis = [[F.one if a == b else F.zero for a in range(len(slots))] for b in range(len(slots))]
    else:
        basis = la.nullspace(F, la.transpose(cols), ncols=len(slots))
    return [build(v) for v in basis]


def isomorphic(x: RepPoint, y: RepPoint, guard: int = 10**6) -> bool:
    """Decide ``y in GL . x`` by searching the Hom space for an invertible element."""
    Q, F = x.quiver, x.field
    if x.r != y.r:
        return False
    basis = hom_space(x, y)
    if F.order ** len(basis) > guard:
        raise TooLarge("Hom space too large to search")
    for coeffs in itertools.product(range(F.order), repeat=len(basis)):
        ok = True
        for i in Q.vertices:
            if not x.r[i]:
                continue
            M = la.zeros(x.r[i], x.r[i], F)
            for c, phi in zip(coeffs, basis):
                if c:
                    M = la.add(F, M, la.scale(F, c, phi[i][0]))
            if la.rank(F, M) < x.r[i]:
                ok = False
                break
        if ok:
            return True
    return False


def orbit_contains_bruteforce(x: RepPoint, y: RepPoint, guard: int = 10**6) -> bool:
    """Cross-check for :func:`isomorphic` by sweeping the whole group."""
    for g in enumerate_group(x.quiver, x.r, x.field, guard):
        if act(g, x) == y:
            return True
    return False


def polystable(x: RepPoint, theta, rho=None, guard: int = DEFAULT_GUARD) -> bool:
    """Every naive Jordan-Hoelder filtration splits."""
    Q = x.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    if not semistable_mult(x, theta, rho, guard).semistable:
        raise NotSemistable("point is not semistable")
    for res in _jh_all(x, theta, rho, guard, False):
        if len(res.factors) == 1:
            continue
        if not isomorphic(x, res.graded):
            return False
    return True


def naive_polystable(x: RepPoint, theta, rho=None, guard: int = DEFAULT_GUARD) -> bool:
    """Some naive Jordan-Hoelder filtration splits."""
    Q = x.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    if not semistable_mult(x, theta, rho, guard).semistable:
        raise NotSemistable("point is not semistable")
    for res in _jh_all(x, theta, rho, guard, False):
        if len(res.factors) == 1 or isomorphic(x, res.graded):
            return True
    return False


# framed representations ------------------------------------------------------


def assemble_framed(framed, x: RepPoint, b: Mapping) -> RepPoint:
    """Point on the framed quiver from ``x`` and the framing maps ``b`` (arrow id -> HomElem)."""
    Qf = framed.quiver
    maps = dict(x.x)
    maps.update(b)
    return RepPoint.make(Qf, framed.rank, x.field, maps)


def framed_semistable(xf: RepPoint, framed, theta, guard: int = DEFAULT_GUARD) -> Verdict:
    """Framed stability as ``(theta_hat, 0)``-stability on the framed quiver."""
    base = {i: v for i, v in framed.rank.items() if i != framed.inf}
    th = framed.theta_hat(theta if isinstance(theta, Mapping) else dict(zip(base, theta)))
    return semistable_mult(xf, th, None, guard)
