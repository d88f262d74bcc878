"""Quivers with multiplicities and the quivers built from them.

Vertex and arrow ids are strings and every derived quantity is keyed by id.
Vectors (ranks, stability parameters, framings) are plain ``dict`` objects
mapping vertex id to ``int``; :func:`as_vector` converts from sequences in
vertex order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Mapping, Sequence

from .errors import ParseError, ThetaNotOrthogonal

Vector = dict


@dataclass(frozen=True)
class Arrow:
    id: str
    source: str
    target: str


@dataclass(frozen=True)
class QuiverWithMult:
    vertices: tuple
    arrows: tuple
    mult_items: tuple = field(default=())

    def __post_init__(self):
        vs = tuple(str(v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(set(vs)) != len(vs):
            raise ParseError("duplicate vertex ids")
        arrows = tuple(a if isinstance(a, Arrow) else Arrow(*map(str, a)) for a in self.arrows)
        object.__setattr__(self, "arrows", arrows)
        ids = [a.id for a in arrows]
        if len(set(ids)) != len(ids):
            raise ParseError("duplicate arrow ids")
        vset = set(vs)
        for a in arrows:
            if a.source not in vset or a.target not in vset:
                raise ParseError(f"arrow {a.id} has an undeclared endpoint")
        mult = dict(self.mult_items)
        mult = {str(k): int(v) for k, v in mult.items()}
        for v in vs:
            mult.setdefault(v, 1)
        if set(mult) != vset:
            raise ParseError("multiplicities given for undeclared vertices")
        if any(m < 1 for m in mult.values()):
            raise ParseError("multiplicities must be positive")
        object.__setattr__(self, "mult_items", tuple((v, mult[v]) for v in vs))

    @classmethod
    def build(cls, vertices: Sequence, arrows: Sequence, mult: Mapping | Sequence | None = None):
        """Convenience constructor; ``arrows`` are ``(id, source, target)`` triples."""
        vertices = [str(v) for v in vertices]
        if mult is None:
            mult = {}
        elif not isinstance(mult, Mapping):
            mult = dict(zip(vertices, mult))
        return cls(tuple(vertices), tuple(arrows), tuple(mult.items()))

    @cached_property
    def mult(self) -> dict:
        return dict(self.mult_items)

    @cached_property
    def arrow(self) -> dict:
        return {a.id: a for a in self.arrows}

    def with_mult(self, mult: Mapping | Sequence) -> "QuiverWithMult":
        return QuiverWithMult.build(self.vertices, self.arrows, mult)

    def incoming(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.target == v]

    def outgoing(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.source == v]

    # per-arrow constants -------------------------------------------------
    def m_ij(self, a: Arrow | str) -> int:
        a = self.arrow[a] if isinstance(a, str) else a
        return math.gcd(self.mult[a.source], self.mult[a.target])

    def f_ji(self, a: Arrow | str) -> int:
        """Degree of the source ring over the common subring."""
        a = self.arrow[a] if isinstance(a, str) else a
        return self.mult[a.source] // self.m_ij(a)

    def f_ij(self, a: Arrow | str) -> int:
        """Degree of the target ring over the common subring."""
        a = self.arrow[a] if isinstance(a, str) else a
        return self.mult[a.target] // self.m_ij(a)

    def mu_ij(self, a: Arrow | str) -> int:
        a = self.arrow[a] if isinstance(a, str) else a
        return math.lcm(self.mult[a.source], self.mult[a.target])

    @cached_property
    def delta(self) -> int:
        return math.gcd(*self.mult.values()) if self.vertices else 1

    @cached_property
    def M(self) -> int:
        return math.lcm(*self.mult.values()) if self.vertices else 1

    # serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "arrows": [{"id": a.id, "from": a.source, "to": a.target} for a in self.arrows],
            "mult": dict(self.mult),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "QuiverWithMult":
        if not isinstance(d, Mapping):
            raise ParseError("quiver must be a JSON object")
        extra = set(d) - {"vertices", "arrows", "mult"}
        if extra:
            raise ParseError(f"unknown quiver keys: {sorted(extra)}")
        try:
            arrows = [(a["id"], a["from"], a["to"]) for a in d.get("arrows", [])]
            return cls.build(d["vertices"], arrows, d.get("mult", {}))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed quiver: {exc}") from exc


@dataclass(frozen=True)
class PairConstants:
    m_ij: int
    mu_ij: int
    f_ji: int
    f_ij: int


@dataclass(frozen=True)
class DerivedConstants:
    pairs: dict
    delta: int
    M: int

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "M": self.M,
            "pairs": [
                {"i": i, "j": j, "m_ij": c.m_ij, "mu_ij": c.mu_ij, "f_ji": c.f_ji, "f_ij": c.f_ij}
                for (i, j), c in self.pairs.items()
            ],
        }


def derived_constants(Q: QuiverWithMult) -> DerivedConstants:
    pairs = {}
    for i in Q.vertices:
        for j in Q.vertices:
            mi, mj = Q.mult[i], Q.mult[j]
            g = math.gcd(mi, mj)
            pairs[(i, j)] = PairConstants(g, math.lcm(mi, mj), mi // g, mj // g)
    return DerivedConstants(pairs, Q.delta, Q.M)


def as_vector(Q: QuiverWithMult, v, name: str = "vector") -> dict:
    """Normalise a mapping or a vertex-ordered sequence to ``{vertex: int}``."""
    if v is None:
        return {i: 0 for i in Q.vertices}
    if isinstance(v, Mapping):
        out = {str(k): int(x) for k, x in v.items()}
        if set(out) - set(Q.vertices):
            raise ParseError(f"{name} mentions unknown vertices {sorted(set(out) - set(Q.vertices))}")
        return {i: out.get(i, 0) for i in Q.vertices}
    v = list(v)
    if len(v) != len(Q.vertices):
        raise ParseError(f"{name} has {len(v)} entries for {len(Q.vertices)} vertices")
    return {i: int(x) for i, x in zip(Q.vertices, v)}


def dot(a: Mapping, b: Mapping) -> int:
    return sum(a[k] * b.get(k, 0) for k in a)


def is_indivisible(r: Mapping) -> bool:
    return math.gcd(*r.values()) == 1 if r else False


def euler_form(Q: QuiverWithMult, r: Mapping, s: Mapping) -> int:
    """``sum m_i r_i s_i - sum_{a: i->j} lcm(m_i, m_j) r_i s_j``."""
    r, s = as_vector(Q, r), as_vector(Q, s)
    val = sum(Q.mult[i] * r[i] * s[i] for i in Q.vertices)
    val -= sum(Q.mu_ij(a) * r[a.source] * s[a.target] for a in Q.arrows)
    return val


def rep_dimension(Q: QuiverWithMult, r: Mapping) -> int:
    """Dimension over k of the representation space with rank vector ``r``."""
    r = as_vector(Q, r)
    return sum(Q.mu_ij(a) * r[a.source] * r[a.target] for a in Q.arrows)


def classical_dimension(Q: QuiverWithMult, r: Mapping) -> int:
    r = as_vector(Q, r)
    return sum(r[a.source] * r[a.target] for a in Q.arrows)


def subvectors(r: Mapping) -> Iterator[dict]:
    """All ``0 <= r' <= r`` componentwise, in lexicographic order."""
    keys = list(r)
    for combo in itertools.product(*(range(r[k] + 1) for k in keys)):
        yield dict(zip(keys, combo))


def is_generic(theta: Mapping, rho: Mapping | None, r: Mapping) -> str:
    """Classify ``(theta, rho)`` against ``r``.

    Returns ``"theta_generic"`` when ``theta . r' != 0`` for every proper
    nonzero ``r' <= r``, ``"pair_generic"`` when every such ``r'`` has
    ``theta . r' != 0`` or ``rho . r' != 0``, and ``"neither"`` otherwise.
    """
    rho = rho or {k: 0 for k in r}
    if dot(r, theta) != 0:
        raise ThetaNotOrthogonal(f"theta . r = {dot(r, theta)} != 0")
    theta_ok = pair_ok = True
    for s in subvectors(r):
        n = sum(s.values())
        if n == 0 or s == dict(r):
            continue
        if dot(s, theta) == 0:
            theta_ok = False
            if dot(s, rho) == 0:
                pair_ok = False
                break
    if theta_ok:
        return "theta_generic"
    return "pair_generic" if pair_ok else "neither"


# framed quivers ----------------------------------------------------------


@dataclass(frozen=True)
class Framed:
    quiver: QuiverWithMult
    rank: dict
    inf: str
    framing_arrows: dict  # vertex -> list of arrow ids from the framing vertex
    theta_hat: Callable[[Mapping], dict]


def _fresh(base: str, taken: set) -> str:
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def build_framed(Q: QuiverWithMult, f: Mapping, r: Mapping, m_inf: int = 1) -> Framed:
    """Add a framing vertex with ``f_i`` arrows into each ``i``.

    The framing vertex has rank 1 and multiplicity ``m_inf``.  The returned
    ``theta_hat(theta)`` is ``l*theta_i + 1`` on old vertices and
    ``-sum r_i`` at the framing vertex, with ``l = 1 + sum r_i``.
    """
    f, r = as_vector(Q, f, "framing"), as_vector(Q, r, "rank")
    inf = _fresh("inf", set(Q.vertices))
    taken = {a.id for a in Q.arrows}
    arrows = list(Q.arrows)
    framing_arrows: dict = {}
    for i in Q.vertices:
        for k in range(f[i]):
            aid = _fresh(f"b_{i}_{k}", taken)
            taken.add(aid)
            arrows.append(Arrow(aid, inf, i))
            framing_arrows.setdefault(i, []).append(aid)
    mult = dict(Q.mult)
    mult[inf] = m_inf
    Qf = QuiverWithMult.build(list(Q.vertices) + [inf], arrows, mult)
    rhat = dict(r)
    rhat[inf] = 1
    total = sum(r.values())
    ell = 1 + total

    def theta_hat(theta: Mapping) -> dict:
        theta = as_vector(Q, theta, "theta")
        out = {i: ell * theta[i] + 1 for i in Q.vertices}
        out[inf] = -total
        return out

    return Framed(Qf, rhat, inf, framing_arrows, theta_hat)


# thickened quiver --------------------------------------------------------


@dataclass(frozen=True)
class ThickArrow:
    arrow: str
    m: int
    f1: int
    f2: int
    source: str
    target: str
    weight: int

    @property
    def key(self) -> tuple:
        return (self.arrow, self.m, self.f1, self.f2)


@dataclass(frozen=True)
class ThickenedQuiver:
    base: QuiverWithMult
    alpha: dict
    arrows: tuple

    def by_arrow(self, aid: str) -> list[ThickArrow]:
        return [t for t in self.arrows if t.arrow == aid]


def thick_weight(Q: QuiverWithMult, a: Arrow, m: int, f1: int, f2: int, alpha: Mapping, beta: int | None = None) -> int:
    """Weight of the coordinate sending source power ``f1`` to target power ``m f_ij + f2``."""
    ai, aj = alpha[a.source], alpha[a.target]
    if beta is None:
        beta = ai * (Q.f_ji(a) - 1)
    return aj * (m * Q.f_ij(a) + f2) - ai * f1 + beta


def thickened_quiver(Q: QuiverWithMult, alpha: Mapping | None = None, beta: Mapping | None = None) -> ThickenedQuiver:
    """One arrow ``(a, m, f1, f2)`` per coordinate of ``x_a``, tagged with its weight.

    ``alpha`` defaults to ``M / m_i``; ``beta`` defaults to ``alpha_i (f_ji - 1)``.
    """
    alpha = canonical_alpha(Q) if alpha is None else as_vector(Q, alpha, "alpha")
    beta = dict(beta or {})
    out = []
    for a in Q.arrows:
        for m in range(Q.m_ij(a)):
            for f1 in range(Q.f_ji(a)):
                for f2 in range(Q.f_ij(a)):
                    w = thick_weight(Q, a, m, f1, f2, alpha, beta.get(a.id))
                    out.append(ThickArrow(a.id, m, f1, f2, a.source, a.target, w))
    return ThickenedQuiver(Q, alpha, tuple(out))


def canonical_alpha(Q: QuiverWithMult) -> dict:
    return {i: Q.M // Q.mult[i] for i in Q.vertices}


# unfolding ---------------------------------------------------------------


def unfold_vertex_id(Q: QuiverWithMult, i: str, n: int) -> str:
    return i if Q.mult[i] == 1 else f"{i}.{n % Q.mult[i]}"


def unfold_arrow_id(Q: QuiverWithMult, aid: str, n: int) -> str:
    mu = Q.mu_ij(aid)
    return aid if mu == 1 else f"{aid}.{n % mu}"


def unfolded_quiver(Q: QuiverWithMult) -> QuiverWithMult:
    """Vertices ``(i, n)`` for ``n`` mod ``m_i``; arrows ``(a, n)`` for ``n`` mod ``lcm``.

    Arrow ``(a, n)`` runs from ``(i, n mod m_i)`` to ``(j, n mod m_j)``; by the
    Chinese remainder theorem these are the pairs ``(n_i, n_j)`` agreeing
    modulo ``gcd(m_i, m_j)``.  Every vertex gets multiplicity ``M``.
    """
    vertices = [unfold_vertex_id(Q, i, n) for i in Q.vertices for n in range(Q.mult[i])]
    arrows = []
    for a in Q.arrows:
        for n in range(Q.mu_ij(a)):
            arrows.append(
                Arrow(unfold_arrow_id(Q, a.id, n), unfold_vertex_id(Q, a.source, n), unfold_vertex_id(Q, a.target, n))
            )
    if len(set(vertices)) != len(vertices):
        raise ParseError("unfolded vertex ids collide; rename vertices")
    return QuiverWithMult.build(vertices, arrows, {v: Q.M for v in vertices})


# doubling ----------------------------------------------------------------


def star(aid: str) -> str:
    return aid[:-1] if aid.endswith("*") else aid + "*"


def double_quiver(Q: QuiverWithMult) -> QuiverWithMult:
    """Add ``a*: j -> i`` for every ``a: i -> j``."""
    arrows = list(Q.arrows) + [Arrow(star(a.id), a.target, a.source) for a in Q.arrows]
    return QuiverWithMult.build(Q.vertices, arrows, Q.mult)


def opposite_quiver(Q: QuiverWithMult) -> QuiverWithMult:
    """Reverse arrows only, keeping the starred ids."""
    arrows = [Arrow(star(a.id), a.target, a.source) for a in Q.arrows]
    return QuiverWithMult.build(Q.vertices, arrows, Q.mult)


def kronecker(m: Sequence[int] = (1, 1), n_arrows: int = 2) -> QuiverWithMult:
    """Two vertices ``1 -> 2`` joined by ``n_arrows`` arrows ``a, b, ...``."""
    names = "abcdefgh"
    return QuiverWithMult.build(["1", "2"], [(names[k], "1", "2") for k in range(n_arrows)], list(m))
