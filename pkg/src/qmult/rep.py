"""Block-matrix model of representations with multiplicities.

Basis convention.  ``k_m^r`` is identified with ``k^{m r}`` using the basis
ordered by *descending* power of ``e``: the basis vector ``e^p`` in copy
``c`` sits at index ``(m - 1 - p) * r + c``.  Multiplication by ``e^d`` is
then block upper triangular, and a ``k_m``-matrix with coefficient matrices
``A_0, ..., A_{m-1}`` expands to the block-Toeplitz matrix with ``A_d`` on
block superdiagonal ``d``.

A ``k_{m_ij}``-linear map ``k_{m_i}^{r_i} -> k_{m_j}^{r_j}`` is stored as the
``m_ij`` blocks ``x_0, ..., x_{m_ij - 1}`` of the first block row of its
full matrix, each of size ``(f_ij r_j) x (f_ji r_i)``.  Sub-block
``(p, q)`` of ``x_l`` carries source power ``f_ji - 1 - q`` to target power
``l f_ij + f_ij - 1 - p``.
"""

from __future__ import annotations

import itertools
import math
import random as _random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from . import linalg as la
from .errors import NonUnit, NotModuleLinear, ShapeMismatch, TooLarge
from .fields import Field
from .quiver import QuiverWithMult, as_vector
from .ring import TruncPoly

DEFAULT_GUARD = 2**26


def _tup(A) -> tuple:
    return tuple(tuple(row) for row in A)


# k_m-matrices in coefficient form ------------------------------------------


def expand_kmat(F: Field, coeffs: Sequence, m: int, rows: int, cols: int) -> list:
    """Full ``(m rows) x (m cols)`` matrix of ``sum_d A_d e^d``."""
    out = la.zeros(m * rows, m * cols, F)
    for d, A in enumerate(coeffs):
        if d >= m:
            break
        for R in range(m - d):
            C = R + d
            for p in range(rows):
                row = out[R * rows + p]
                Ap = A[p]
                for q in range(cols):
                    row[C * cols + q] = Ap[q]
    return out


def compress_kmat(F: Field, mat, m: int, rows: int, cols: int) -> tuple:
    """Inverse of :func:`expand_kmat`; raises ``NotModuleLinear`` off the pattern."""
    if len(mat) != m * rows or (mat and len(mat[0]) != m * cols):
        raise ShapeMismatch("matrix has the wrong size for a k_m-matrix")
    coeffs = tuple(_tup(la.block(mat, 0, rows, d * cols, (d + 1) * cols)) for d in range(m))
    if _tup(expand_kmat(F, coeffs, m, rows, cols)) != _tup(mat):
        raise NotModuleLinear("matrix does not commute with multiplication by e")
    return coeffs


def eps_power_matrix(F: Field, m: int, r: int, d: int) -> list:
    """Expanded matrix of multiplication by ``e^d`` on ``k_m^r``."""
    coeffs = [la.zeros(r, r, F) for _ in range(m)]
    if d < m:
        coeffs[d] = la.identity(r, F)
    return expand_kmat(F, coeffs, m, r, r)


def kmat_mul(F: Field, A: Sequence, B: Sequence, m: int) -> tuple:
    """Product of ``k_m``-matrices in coefficient form (convolution)."""
    rows = len(A[0])
    inner = len(B[0]) if B[0] else 0
    cols = len(B[0][0]) if inner else 0
    if inner == 0:
        return tuple(_tup(la.zeros(rows, cols, F)) for _ in range(m))
    out = []
    for n in range(m):
        acc = la.zeros(rows, cols, F)
        for d in range(n + 1):
            if la.is_zero(A[d]) or la.is_zero(B[n - d]):
                continue
            acc = la.add(F, acc, la.matmul(F, A[d], B[n - d]))
        out.append(_tup(acc))
    return tuple(out)


def kmat_inverse(F: Field, A: Sequence, m: int) -> tuple:
    """Inverse of a square ``k_m``-matrix; ``h_d = -A_0^{-1} sum_{e>=1} A_e h_{d-e}``."""
    r = len(A[0])
    if r == 0:
        return tuple(() for _ in range(m))
    h0 = la.inverse(F, A[0])
    hs = [h0]
    for d in range(1, m):
        acc = la.zeros(r, r, F)
        for e in range(1, d + 1):
            if not la.is_zero(A[e]):
                acc = la.add(F, acc, la.matmul(F, A[e], hs[d - e]))
        hs.append(la.scale(F, F.red(-1), la.matmul(F, h0, acc)))
    return tuple(_tup(h) for h in hs)


# Hom elements ----------------------------------------------------------------


@dataclass(frozen=True)
class HomElem:
    field: Field
    mi: int
    mj: int
    ri: int
    rj: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(_tup(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) != self.m_ij:
            raise ShapeMismatch(f"expected {self.m_ij} blocks, got {len(blocks)}")
        R, C = self.block_shape
        for b in blocks:
            if len(b) != R or any(len(row) != C for row in b):
                raise ShapeMismatch(f"blocks must be {R}x{C}")

    @cached_property
    def m_ij(self) -> int:
        return math.gcd(self.mi, self.mj)

    @property
    def f_ji(self) -> int:
        return self.mi // self.m_ij

    @property
    def f_ij(self) -> int:
        return self.mj // self.m_ij

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.f_ij * self.rj, self.f_ji * self.ri

    @classmethod
    def zero(cls, F: Field, mi: int, mj: int, ri: int, rj: int) -> "HomElem":
        g = math.gcd(mi, mj)
        R, C = (mj // g) * rj, (mi // g) * ri
        return cls(F, mi, mj, ri, rj, tuple(_tup(la.zeros(R, C, F)) for _ in range(g)))

    def is_zero(self) -> bool:
        return all(la.is_zero(b) for b in self.blocks)

    def coords(self) -> tuple:
        return tuple(c for b in self.blocks for row in b for c in row)

    @classmethod
    def from_coords(cls, F, mi, mj, ri, rj, values) -> "HomElem":
        g = math.gcd(mi, mj)
        R, C = (mj // g) * rj, (mi // g) * ri
        it = iter(values)
        blocks = tuple(tuple(tuple(next(it) for _ in range(C)) for _ in range(R)) for _ in range(g))
        return cls(F, mi, mj, ri, rj, blocks)

    @property
    def ncoords(self) -> int:
        R, C = self.block_shape
        return self.m_ij * R * C

    def sub_block(self, l: int, p: int, q: int) -> list:
        """The ``r_j x r_i`` sub-block ``(p, q)`` of ``x_l``."""
        b = self.blocks[l]
        return [list(row[q * self.ri : (q + 1) * self.ri]) for row in b[p * self.rj : (p + 1) * self.rj]]

    def coefficient(self, src_power: int, tgt_power: int) -> list:
        """Matrix carrying ``e^{src_power}`` (copy c) to the ``e^{tgt_power}`` component."""
        F = self.field
        # shift by e_{m_ij} so that the source lies in the first f_ji powers
        shift = src_power // self.f_ji
        s = src_power - shift * self.f_ji
        t = tgt_power - shift * self.f_ij
        if t < 0:
            return la.zeros(self.rj, self.ri, F)
        l, rem = divmod(t, self.f_ij)
        if l >= self.m_ij:
            return la.zeros(self.rj, self.ri, F)
        return self.sub_block(l, self.f_ij - 1 - rem, self.f_ji - 1 - s)

    def __add__(self, other: "HomElem") -> "HomElem":
        F = self.field
        return HomElem(F, self.mi, self.mj, self.ri, self.rj, tuple(la.add(F, a, b) for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "HomElem") -> "HomElem":
        F = self.field
        return HomElem(F, self.mi, self.mj, self.ri, self.rj, tuple(la.sub(F, a, b) for a, b in zip(self.blocks, other.blocks)))

    def scaled(self, c) -> "HomElem":
        F = self.field
        return HomElem(F, self.mi, self.mj, self.ri, self.rj, tuple(la.scale(F, c, b) for b in self.blocks))


def expand_full(h: HomElem) -> list:
    """Full ``(m_j r_j) x (m_i r_i)`` matrix with ``x_l`` on block superdiagonal ``l``."""
    F = h.field
    R, C = h.block_shape
    g = h.m_ij
    out = la.zeros(h.mj * h.rj, h.mi * h.ri, F)
    for l, b in enumerate(h.blocks):
        for B in range(g - l):
            r0, c0 = B * R, (B + l) * C
            for p in range(R):
                row = out[r0 + p]
                bp = b[p]
                for q in range(C):
                    row[c0 + q] = bp[q]
    return out


def compress_full(F: Field, mat, mi: int, mj: int, ri: int, rj: int) -> HomElem:
    """Inverse of :func:`expand_full`; ``NotModuleLinear`` if not block Toeplitz."""
    if len(mat) != mj * rj or any(len(row) != mi * ri for row in mat):
        raise ShapeMismatch(f"expected a {mj * rj}x{mi * ri} matrix")
    g = math.gcd(mi, mj)
    R, C = (mj // g) * rj, (mi // g) * ri
    blocks = tuple(_tup(la.block(mat, 0, R, l * C, (l + 1) * C)) for l in range(g))
    h = HomElem(F, mi, mj, ri, rj, blocks)
    if _tup(expand_full(h)) != _tup(mat):
        raise NotModuleLinear("matrix is not linear over the common subring")
    return h


# points ----------------------------------------------------------------------


@dataclass(frozen=True)
class RepPoint:
    quiver: QuiverWithMult
    rank: tuple  # ((vertex, r_i), ...)
    field: Field
    arrow_items: tuple  # ((arrow id, HomElem), ...)

    def __post_init__(self):
        Q = self.quiver
        rank = as_vector(Q, dict(self.rank) if not isinstance(self.rank, Mapping) else self.rank, "rank")
        object.__setattr__(self, "rank", tuple(rank.items()))
        items = dict(self.arrow_items)
        if set(items) != {a.id for a in Q.arrows}:
            raise ShapeMismatch("point must give exactly one map per arrow")
        for a in Q.arrows:
            h = items[a.id]
            want = (Q.mult[a.source], Q.mult[a.target], rank[a.source], rank[a.target])
            if (h.mi, h.mj, h.ri, h.rj) != want:
                raise ShapeMismatch(f"arrow {a.id}: shape {(h.mi, h.mj, h.ri, h.rj)} != {want}")
        object.__setattr__(self, "arrow_items", tuple((a.id, items[a.id]) for a in Q.arrows))

    @classmethod
    def make(cls, Q: QuiverWithMult, r, F: Field, maps: Mapping) -> "RepPoint":
        return cls(Q, tuple(as_vector(Q, r, "rank").items()), F, tuple(maps.items()))

    @cached_property
    def r(self) -> dict:
        return dict(self.rank)

    @cached_property
    def x(self) -> dict:
        return dict(self.arrow_items)

    def __getitem__(self, aid: str) -> HomElem:
        return self.x[aid]

    def coords(self) -> tuple:
        return tuple(c for _, h in self.arrow_items for c in h.coords())

    def is_zero(self) -> bool:
        return all(h.is_zero() for _, h in self.arrow_items)

    def replace(self, maps: Mapping) -> "RepPoint":
        d = dict(self.arrow_items)
        d.update(maps)
        return RepPoint(self.quiver, self.rank, self.field, tuple(d.items()))

    def __add__(self, other: "RepPoint") -> "RepPoint":
        return self.replace({a: h + other.x[a] for a, h in self.arrow_items})

    def __sub__(self, other: "RepPoint") -> "RepPoint":
        return self.replace({a: h - other.x[a] for a, h in self.arrow_items})

    def scaled(self, c) -> "RepPoint":
        return self.replace({a: h.scaled(c) for a, h in self.arrow_items})


def zero_point(Q: QuiverWithMult, r, F: Field) -> RepPoint:
    r = as_vector(Q, r, "rank")
    maps = {
        a.id: HomElem.zero(F, Q.mult[a.source], Q.mult[a.target], r[a.source], r[a.target]) for a in Q.arrows
    }
    return RepPoint.make(Q, r, F, maps)


def point_ncoords(Q: QuiverWithMult, r) -> int:
    r = as_vector(Q, r, "rank")
    return sum(Q.mu_ij(a) * r[a.source] * r[a.target] for a in Q.arrows)


def point_from_coords(Q: QuiverWithMult, r, F: Field, values: Sequence) -> RepPoint:
    """Inverse of :meth:`RepPoint.coords` (arrow order, then blocks, rows, columns)."""
    r = as_vector(Q, r, "rank")
    maps = {}
    pos = 0
    for a in Q.arrows:
        mi, mj = Q.mult[a.source], Q.mult[a.target]
        n = Q.mu_ij(a) * r[a.source] * r[a.target]
        maps[a.id] = HomElem.from_coords(F, mi, mj, r[a.source], r[a.target], values[pos : pos + n])
        pos += n
    if pos != len(values):
        raise ShapeMismatch(f"expected {pos} coordinates, got {len(values)}")
    return RepPoint.make(Q, r, F, maps)


def enumerate_points(Q: QuiverWithMult, r, F: Field, guard: int = DEFAULT_GUARD) -> Iterator[RepPoint]:
    n = point_ncoords(Q, r)
    if F.order**n > guard:
        raise TooLarge(f"{F.order}^{n} points exceed the guard {guard}")
    for vals in itertools.product(range(F.order), repeat=n):
        yield point_from_coords(Q, r, F, vals)


def random_point(Q: QuiverWithMult, r, F: Field, rng: _random.Random) -> RepPoint:
    return point_from_coords(Q, r, F, [F.random(rng) for _ in range(point_ncoords(Q, r))])


@dataclass(frozen=True)
class ClassicalRep:
    quiver: QuiverWithMult
    dim: tuple  # ((vertex, d_i), ...)
    field: Field
    map_items: tuple  # ((arrow id, matrix), ...)

    def __post_init__(self):
        Q = self.quiver
        dim = as_vector(Q, dict(self.dim) if not isinstance(self.dim, Mapping) else self.dim, "dim")
        object.__setattr__(self, "dim", tuple(dim.items()))
        maps = dict(self.map_items)
        if set(maps) != {a.id for a in Q.arrows}:
            raise ShapeMismatch("classical representation needs one matrix per arrow")
        fixed = []
        for a in Q.arrows:
            A = _tup(maps[a.id])
            if len(A) != dim[a.target] or any(len(row) != dim[a.source] for row in A):
                raise ShapeMismatch(f"arrow {a.id} must be {dim[a.target]}x{dim[a.source]}")
            fixed.append((a.id, A))
        object.__setattr__(self, "map_items", tuple(fixed))

    @classmethod
    def make(cls, Q: QuiverWithMult, d, F: Field, maps: Mapping) -> "ClassicalRep":
        return cls(Q, tuple(as_vector(Q, d, "dim").items()), F, tuple(maps.items()))

    @cached_property
    def d(self) -> dict:
        return dict(self.dim)

    @cached_property
    def v(self) -> dict:
        return dict(self.map_items)

    def __getitem__(self, aid: str):
        return self.v[aid]

    def coords(self) -> tuple:
        return tuple(c for _, A in self.map_items for row in A for c in row)


def classical_from_coords(Q: QuiverWithMult, d, F: Field, values: Sequence) -> ClassicalRep:
    d = as_vector(Q, d, "dim")
    maps = {}
    pos = 0
    for a in Q.arrows:
        rows, cols = d[a.target], d[a.source]
        maps[a.id] = [list(values[pos + i * cols : pos + (i + 1) * cols]) for i in range(rows)]
        pos += rows * cols
    return ClassicalRep.make(Q, d, F, maps)


def enumerate_classical(Q: QuiverWithMult, d, F: Field, guard: int = DEFAULT_GUARD) -> Iterator[ClassicalRep]:
    d = as_vector(Q, d, "dim")
    n = sum(d[a.source] * d[a.target] for a in Q.arrows)
    if F.order**n > guard:
        raise TooLarge(f"{F.order}^{n} classical points exceed the guard {guard}")
    for vals in itertools.product(range(F.order), repeat=n):
        yield classical_from_coords(Q, d, F, vals)


def act_classical(gbar: Mapping, v: ClassicalRep) -> ClassicalRep:
    """``g_t v_a g_s^{-1}`` for a tuple of invertible field matrices."""
    F = v.field
    Q = v.quiver
    inv = {i: la.inverse(F, gbar[i]) if v.d[i] else [] for i in Q.vertices}
    maps = {}
    for a in Q.arrows:
        A = v[a.id]
        if not A or not A[0]:
            maps[a.id] = A
            continue
        maps[a.id] = la.matmul(F, la.matmul(F, gbar[a.target], A), inv[a.source])
    return ClassicalRep.make(Q, v.d, F, maps)


# group elements --------------------------------------------------------------


@dataclass(frozen=True)
class GroupElem:
    """Per vertex, an invertible ``r_i x r_i`` matrix over ``k_{m_i}``.

    Stored as coefficient matrices ``g_0, ..., g_{m_i - 1}``.
    """

    quiver: QuiverWithMult
    field: Field
    item_coeffs: tuple  # ((vertex, (g_0, ..., g_{m-1})), ...)

    def __post_init__(self):
        Q = self.quiver
        d = dict(self.item_coeffs)
        if set(d) != set(Q.vertices):
            raise ShapeMismatch("group element needs every vertex")
        fixed = []
        for i in Q.vertices:
            cs = tuple(_tup(c) for c in d[i])
            if len(cs) != Q.mult[i]:
                raise ShapeMismatch(f"vertex {i} needs {Q.mult[i]} coefficient matrices")
            if cs[0] and la.rank(self.field, cs[0]) != len(cs[0]):
                raise NonUnit(f"constant term at vertex {i} is singular")
            fixed.append((i, cs))
        object.__setattr__(self, "item_coeffs", tuple(fixed))

    @classmethod
    def make(cls, Q: QuiverWithMult, F: Field, coeffs: Mapping) -> "GroupElem":
        return cls(Q, F, tuple(coeffs.items()))

    @cached_property
    def g(self) -> dict:
        return dict(self.item_coeffs)

    @cached_property
    def rank(self) -> dict:
        return {i: len(cs[0]) for i, cs in self.item_coeffs}

    @classmethod
    def identity(cls, Q: QuiverWithMult, r, F: Field) -> "GroupElem":
        r = as_vector(Q, r, "rank")
        return cls.make(
            Q, F, {i: [la.identity(r[i], F)] + [la.zeros(r[i], r[i], F)] * (Q.mult[i] - 1) for i in Q.vertices}
        )

    @classmethod
    def levi(cls, Q: QuiverWithMult, gbar: Mapping, F: Field) -> "GroupElem":
        """Constant-coefficient element with ``g_0 = gbar``."""
        return cls.make(
            Q, F, {i: [gbar[i]] + [la.zeros(len(gbar[i]), len(gbar[i]), F)] * (Q.mult[i] - 1) for i in Q.vertices}
        )

    @classmethod
    def from_delta(cls, Q: QuiverWithMult, r, lam: TruncPoly) -> "GroupElem":
        """The scalar ``lam`` in ``k_delta^x`` placed at every vertex via ``e -> e^{m_i/delta}``."""
        from .ring import embed_subring

        r = as_vector(Q, r, "rank")
        F = lam.field
        out = {}
        for i in Q.vertices:
            c = embed_subring(lam, Q.mult[i]).coeffs
            out[i] = [la.scale(F, c[d], la.identity(r[i], F)) for d in range(Q.mult[i])]
        return cls.make(Q, F, out)

    def entry_polys(self, i: str) -> list:
        """Vertex ``i`` as a matrix of :class:`TruncPoly`."""
        cs = self.g[i]
        n = len(cs[0])
        return [[TruncPoly(self.field, tuple(c[p][q] for c in cs)) for q in range(n)] for p in range(n)]

    def expanded(self, i: str) -> list:
        r = self.rank[i]
        return expand_kmat(self.field, self.g[i], self.quiver.mult[i], r, r)

    def reduce(self) -> dict:
        """``gbar``: the constant-term matrices."""
        return {i: cs[0] for i, cs in self.item_coeffs}

    def __mul__(self, other: "GroupElem") -> "GroupElem":
        F = self.field
        return GroupElem.make(
            self.quiver, F, {i: kmat_mul(F, self.g[i], other.g[i], self.quiver.mult[i]) for i in self.quiver.vertices}
        )

    def inverse(self) -> "GroupElem":
        F = self.field
        return GroupElem.make(
            self.quiver, F, {i: kmat_inverse(F, self.g[i], self.quiver.mult[i]) for i in self.quiver.vertices}
        )

    def is_unipotent(self) -> bool:
        """Membership in the kernel of reduction mod ``e``."""
        F = self.field
        return all(_tup(cs[0]) == _tup(la.identity(len(cs[0]), F)) for _, cs in self.item_coeffs)

    def is_identity(self) -> bool:
        return self.is_unipotent() and all(la.is_zero(c) for _, cs in self.item_coeffs for c in cs[1:])

    def delta_scalar(self) -> TruncPoly | None:
        """The ``lam`` in ``k_delta^x`` with ``self == from_delta(lam)``, else ``None``."""
        Q, F = self.quiver, self.field
        dlt = Q.delta
        lam = None
        for i in Q.vertices:
            cs = self.g[i]
            n = len(cs[0])
            if n == 0:
                continue
            step = Q.mult[i] // dlt
            vals = []
            for d, c in enumerate(cs):
                s = c[0][0]
                if _tup(c) != _tup(la.scale(F, s, la.identity(n, F))):
                    return None
                if d % step:
                    if s:
                        return None
                else:
                    vals.append(s)
            cand = TruncPoly(F, tuple(vals))
            if lam is None:
                lam = cand
            elif lam != cand:
                return None
        return lam if lam is not None else TruncPoly.one(F, dlt)

    def is_in_delta(self) -> bool:
        return self.delta_scalar() is not None

    def coords(self) -> tuple:
        return tuple(x for _, cs in self.item_coeffs for c in cs for row in c for x in row)


def random_group_elem(Q: QuiverWithMult, r, F: Field, rng: _random.Random, unipotent: bool = False) -> GroupElem:
    r = as_vector(Q, r, "rank")
    out = {}
    for i in Q.vertices:
        n = r[i]
        while True:
            g0 = la.identity(n, F) if unipotent else [[F.random(rng) for _ in range(n)] for _ in range(n)]
            if n == 0 or la.rank(F, g0) == n:
                break
        rest = [[[F.random(rng) for _ in range(n)] for _ in range(n)] for _ in range(Q.mult[i] - 1)]
        out[i] = [g0] + rest
    return GroupElem.make(Q, F, out)


def act(g: GroupElem, x: RepPoint) -> RepPoint:
    """``g . x = (g_t x_a g_s^{-1})_a`` computed on full matrices."""
    F, Q = x.field, x.quiver
    ginv = g.inverse()
    exp = {i: g.expanded(i) for i in Q.vertices}
    expinv = {i: ginv.expanded(i) for i in Q.vertices}
    maps = {}
    for a in Q.arrows:
        h = x[a.id]
        if h.ri == 0 or h.rj == 0:
            maps[a.id] = h
            continue
        X = expand_full(h)
        Y = la.matmul(F, la.matmul(F, exp[a.target], X), expinv[a.source])
        maps[a.id] = compress_full(F, Y, h.mi, h.mj, h.ri, h.rj)
    return x.replace(maps)


# truncation, section, twist --------------------------------------------------


def truncate(x: RepPoint) -> ClassicalRep:
    """The ``r_j x r_i`` sub-block ``(f_ij - 1, 0)`` of ``x_0`` on every arrow."""
    Q = x.quiver
    maps = {a.id: x[a.id].sub_block(0, Q.f_ij(a) - 1, 0) for a in Q.arrows}
    return ClassicalRep.make(Q, x.r, x.field, maps)


def section_iota(v: ClassicalRep, Q: QuiverWithMult | None = None) -> RepPoint:
    """Embed a classical representation as the point whose only nonzero entries are ``v_a`` at ``tau``'s position.

    ``Q`` supplies the multiplicities (defaults to ``v.quiver``).
    """
    Q = Q or v.quiver
    F = v.field
    d = v.d
    maps = {}
    for a in Q.arrows:
        mi, mj, ri, rj = Q.mult[a.source], Q.mult[a.target], d[a.source], d[a.target]
        h = HomElem.zero(F, mi, mj, ri, rj)
        blocks = [la.to_list(b) for b in h.blocks]
        p = Q.f_ij(a) - 1
        A = v[a.id]
        for s in range(rj):
            for c in range(ri):
                blocks[0][p * rj + s][c] = A[s][c]
        maps[a.id] = HomElem(F, mi, mj, ri, rj, tuple(blocks))
    return RepPoint.make(Q, d, F, maps)


def sigma_twist(x: RepPoint) -> RepPoint:
    """Compose every ``x_a`` with multiplication by ``e^{f_ji - 1}`` on its source."""
    F, Q = x.field, x.quiver
    maps = {}
    for a in Q.arrows:
        h = x[a.id]
        f = Q.f_ji(a)
        if f == 1 or h.ri == 0 or h.rj == 0:
            maps[a.id] = h
            continue
        S = eps_power_matrix(F, h.mi, h.ri, f - 1)
        maps[a.id] = compress_full(F, la.matmul(F, expand_full(h), S), h.mi, h.mj, h.ri, h.rj)
    return x.replace(maps)


# thickened coordinates -------------------------------------------------------


def thicken_coords(x: RepPoint) -> dict:
    """Map ``(a, m, f1, f2) -> r_j x r_i`` matrix carrying source power ``f1`` to target power ``m f_ij + f2``."""
    Q = x.quiver
    out = {}
    for a in Q.arrows:
        h = x[a.id]
        fij, fji = Q.f_ij(a), Q.f_ji(a)
        for m in range(Q.m_ij(a)):
            for f1 in range(fji):
                for f2 in range(fij):
                    out[(a.id, m, f1, f2)] = h.sub_block(m, fij - 1 - f2, fji - 1 - f1)
    return out


def thicken_inverse(Q: QuiverWithMult, r, F: Field, coords: Mapping) -> RepPoint:
    r = as_vector(Q, r, "rank")
    maps = {}
    for a in Q.arrows:
        ri, rj = r[a.source], r[a.target]
        mi, mj = Q.mult[a.source], Q.mult[a.target]
        h = HomElem.zero(F, mi, mj, ri, rj)
        blocks = [la.to_list(b) for b in h.blocks]
        fij, fji = Q.f_ij(a), Q.f_ji(a)
        for m in range(Q.m_ij(a)):
            for f1 in range(fji):
                for f2 in range(fij):
                    A = coords[(a.id, m, f1, f2)]
                    p, q = fij - 1 - f2, fji - 1 - f1
                    for s in range(rj):
                        for c in range(ri):
                            blocks[m][p * rj + s][q * ri + c] = A[s][c]
        maps[a.id] = HomElem(F, mi, mj, ri, rj, tuple(blocks))
    return RepPoint.make(Q, r, F, maps)


def coordinate_exponents(Q: QuiverWithMult) -> dict:
    """For each thickened coordinate, ``(source power, target power)``."""
    out = {}
    for a in Q.arrows:
        for m in range(Q.m_ij(a)):
            for f1 in range(Q.f_ji(a)):
                for f2 in range(Q.f_ij(a)):
                    out[(a.id, m, f1, f2)] = (f1, m * Q.f_ij(a) + f2)
    return out


# free submodules -------------------------------------------------------------


@dataclass(frozen=True)
class FreeSubmodule:
    """Submodule of ``k_m^r`` spanned by the columns of an ``r x r'`` ``k_m``-matrix."""

    field: Field
    m: int
    r: int
    coeffs: tuple  # (A_0, ..., A_{m-1}), each r x r'

    @property
    def rank(self) -> int:
        return len(self.coeffs[0][0]) if self.coeffs and self.coeffs[0] else 0

    def expanded(self) -> list:
        return expand_kmat(self.field, self.coeffs, self.m, self.r, self.rank)

    def basis(self) -> list:
        """F-basis of the submodule as vectors in ``k^{m r}``."""
        if self.rank == 0:
            return []
        return la.transpose(self.expanded())

    def contains(self, vectors: Sequence) -> bool:
        K = la.annihilator(self.field, self.basis(), self.m * self.r)
        return all(not any(la.matvec(self.field, K, v)) for v in vectors) if K else True


def canonical_generator(F: Field, coeffs: Sequence, m: int) -> tuple:
    """Column-reduced form of a free generator matrix.

    Pivot rows are chosen greedily on the reduction mod ``e``; right
    multiplication by the inverse of the pivot-row submatrix makes those rows
    the identity.
    """
    A0 = coeffs[0]
    r = len(A0)
    rp = len(A0[0]) if r else 0
    if rp == 0:
        return tuple(tuple(() for _ in range(r)) for _ in range(m))
    pivots, rows = [], []
    for i in range(r):
        trial = rows + [A0[i]]
        if la.rank(F, trial) > len(rows):
            rows = trial
            pivots.append(i)
        if len(pivots) == rp:
            break
    if len(pivots) != rp:
        raise NonUnit("generator does not reduce to a full-rank matrix")
    P = tuple(tuple(c[i] for i in pivots) for c in coeffs)
    Pinv = kmat_inverse(F, P, m)
    return kmat_mul(F, coeffs, Pinv, m)


def count_free_submodules(m: int, r: int, rp: int, q: int) -> int:
    return la.gaussian_binomial(r, rp, q) * q ** ((m - 1) * rp * (r - rp))


def enumerate_free_submodules(m: int, r: int, rp: int, F: Field, guard: int = DEFAULT_GUARD) -> list[FreeSubmodule]:
    """One canonical generator per free rank-``rp`` submodule of ``k_m^r``.

    The reduction mod ``e`` runs over column-echelon Schubert cells; higher
    coefficients vanish on pivot rows and are free elsewhere.
    """
    if not 0 <= rp <= r:
        raise ValueError("need 0 <= r' <= r")
    total = count_free_submodules(m, r, rp, F.order)
    if total > guard:
        raise TooLarge(f"{total} free submodules exceed the guard {guard}")
    elems = list(F.elements())
    out = []
    for pivots in itertools.combinations(range(r), rp):
        pset = set(pivots)
        slots0 = [(i, c) for i in range(r) if i not in pset for c in range(rp) if pivots[c] < i]
        slots_hi = [(d, i, c) for d in range(1, m) for i in range(r) if i not in pset for c in range(rp)]
        for v0 in itertools.product(elems, repeat=len(slots0)):
            A0 = la.zeros(r, rp, F)
            for c, p in enumerate(pivots):
                A0[p][c] = F.one
            for (i, c), val in zip(slots0, v0):
                A0[i][c] = val
            for vh in itertools.product(elems, repeat=len(slots_hi)):
                cs = [A0] + [la.zeros(r, rp, F) for _ in range(m - 1)]
                for (d, i, c), val in zip(slots_hi, vh):
                    cs[d][i][c] = val
                out.append(FreeSubmodule(F, m, r, tuple(_tup(c) for c in cs)))
    return out


def submodule_rank(F: Field, basis: Sequence, m: int, r: int) -> int:
    """``dim N / (N cap eM)``: rank of the projection to the power-0 coordinates."""
    if not basis:
        return 0
    return la.rank(F, [list(v[(m - 1) * r :]) for v in basis])


def is_eps_stable(F: Field, basis: Sequence, m: int, r: int) -> bool:
    if not basis:
        return True
    E = eps_power_matrix(F, m, r, 1)
    K = la.annihilator(F, basis, m * r)
    if not K:
        return True
    return all(not any(la.matvec(F, K, la.matvec(F, E, v))) for v in basis)


def point_dict(x: RepPoint) -> dict:
    """JSON-ready rendering of a point."""
    F = x.field
    return {
        "arrows": {
            aid: {"blocks": [[[F.render(c) for c in row] for row in b] for b in h.blocks]} for aid, h in x.arrow_items
        },
        "rank": dict(x.rank),
    }


def classical_dict(v: ClassicalRep) -> dict:
    F = v.field
    return {"arrows": {aid: [[F.render(c) for c in row] for row in A] for aid, A in v.map_items}, "dim": dict(v.dim)}

