"""Cotangent data on the doubled quiver: trace pairing, moment map, fibres.

A cotangent point is a pair ``(x, y)`` with ``x`` on ``Q`` and ``y`` on the
opposite quiver, whose arrows are named ``a*``.  Lie algebra elements are
stored like group elements, as coefficient matrices per vertex, but with
no invertibility requirement.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from . import linalg as la
from .errors import AlphaNotOnLine, GammaNotInGl0, ShapeMismatch
from .fields import Field
from .grading import GradingParams, act_gm, check_params
from .quiver import QuiverWithMult, as_vector, double_quiver, opposite_quiver, star
from .rep import (
    DEFAULT_GUARD,
    HomElem,
    RepPoint,
    compress_full,
    compress_kmat,
    eps_power_matrix,
    expand_full,
    expand_kmat,
    point_from_coords,
    point_ncoords,
    random_point,
    truncate,
    zero_point,
)
from .ring import TruncPoly
from .stability import (
    UNSTABLE,
    Verdict,
    _check_orthogonal,
    condition_two,
    direct_condition_one,
    direct_condition_two,
    king_semistable,
)


# Lie algebra -----------------------------------------------------------------


@dataclass(frozen=True)
class LieElem:
    """Per vertex, an ``r_i x r_i`` matrix over ``k_{m_i}`` in coefficient form."""

    quiver: QuiverWithMult
    field: Field
    item_coeffs: tuple  # ((vertex, (xi_0, ..., xi_{m-1})), ...)

    def __post_init__(self):
        Q = self.quiver
        d = dict(self.item_coeffs)
        if set(d) != set(Q.vertices):
            raise ShapeMismatch("Lie algebra element needs every vertex")
        fixed = []
        for i in Q.vertices:
            cs = tuple(tuple(tuple(row) for row in c) for c in d[i])
            if len(cs) != Q.mult[i]:
                raise ShapeMismatch(f"vertex {i} needs {Q.mult[i]} coefficient matrices")
            n = len(cs[0])
            if any(len(c) != n or any(len(row) != n for row in c) for c in cs):
                raise ShapeMismatch(f"vertex {i}: coefficient matrices must be square of one size")
            fixed.append((i, cs))
        object.__setattr__(self, "item_coeffs", tuple(fixed))

    @classmethod
    def make(cls, Q: QuiverWithMult, F: Field, coeffs: Mapping) -> "LieElem":
        return cls(Q, F, tuple((i, coeffs[i]) for i in Q.vertices))

    @classmethod
    def zero(cls, Q: QuiverWithMult, r, F: Field) -> "LieElem":
        r = as_vector(Q, r, "rank")
        return cls.make(Q, F, {i: [la.zeros(r[i], r[i], F)] * Q.mult[i] for i in Q.vertices})

    @classmethod
    def scalar(cls, Q: QuiverWithMult, r, F: Field, gamma: Mapping) -> "LieElem":
        """``(gamma_i Id)_i`` from per-vertex coefficient lists of ``gamma_i`` in ``k_{m_i}``."""
        r = as_vector(Q, r, "rank")
        out = {}
        for i in Q.vertices:
            cs = [F(c) for c in gamma.get(i, [])]
            if len(cs) > Q.mult[i]:
                raise ShapeMismatch(f"gamma at vertex {i} has more than {Q.mult[i]} coefficients")
            cs += [F.zero] * (Q.mult[i] - len(cs))
            out[i] = [la.scale(F, c, la.identity(r[i], F)) for c in cs]
        return cls.make(Q, F, out)

    @cached_property
    def xi(self) -> dict:
        return dict(self.item_coeffs)

    @cached_property
    def rank(self) -> dict:
        return {i: len(cs[0]) for i, cs in self.item_coeffs}

    def entry_polys(self, i: str) -> list:
        cs = self.xi[i]
        n = len(cs[0])
        return [[TruncPoly(self.field, tuple(c[p][q] for c in cs)) for q in range(n)] for p in range(n)]

    def expanded(self, i: str) -> list:
        n = self.rank[i]
        return expand_kmat(self.field, self.xi[i], self.quiver.mult[i], n, n)

    def is_scalar_tuple(self) -> bool:
        """Every ``xi_i`` is ``gamma_i Id`` for some ``gamma_i`` in ``k_{m_i}``."""
        F = self.field
        for _, cs in self.item_coeffs:
            n = len(cs[0])
            for c in cs:
                if n and la.to_tuple(c) != la.to_tuple(la.scale(F, c[0][0], la.identity(n, F))):
                    return False
        return True

    def coords(self) -> tuple:
        return tuple(x for _, cs in self.item_coeffs for c in cs for row in c for x in row)

    def is_zero(self) -> bool:
        return all(la.is_zero(c) for _, cs in self.item_coeffs for c in cs)

    def __add__(self, other: "LieElem") -> "LieElem":
        F = self.field
        return LieElem.make(
            self.quiver, F, {i: [la.add(F, a, b) for a, b in zip(self.xi[i], other.xi[i])] for i in self.quiver.vertices}
        )

    def __sub__(self, other: "LieElem") -> "LieElem":
        F = self.field
        return LieElem.make(
            self.quiver, F, {i: [la.sub(F, a, b) for a, b in zip(self.xi[i], other.xi[i])] for i in self.quiver.vertices}
        )

    def to_dict(self) -> dict:
        F = self.field
        return {i: [[[F.render(c) for c in row] for row in A] for A in cs] for i, cs in self.item_coeffs}


def random_lie_elem(Q: QuiverWithMult, r, F: Field, rng: _random.Random) -> LieElem:
    r = as_vector(Q, r, "rank")
    return LieElem.make(
        Q,
        F,
        {i: [[[F.random(rng) for _ in range(r[i])] for _ in range(r[i])] for _ in range(Q.mult[i])] for i in Q.vertices},
    )


def lie_from_expanded(Q: QuiverWithMult, F: Field, mats: Mapping, r: Mapping) -> LieElem:
    return LieElem.make(Q, F, {i: compress_kmat(F, mats[i], Q.mult[i], r[i], r[i]) for i in Q.vertices})


def delta_lie_basis(Q: QuiverWithMult, r, F: Field) -> list[LieElem]:
    """``(e^{d m_i / delta} Id)_i`` for ``0 <= d < delta``: the Lie algebra of the scalar subgroup."""
    r = as_vector(Q, r, "rank")
    dlt = Q.delta
    out = []
    for d in range(dlt):
        coeffs = {}
        for i in Q.vertices:
            cs = [la.zeros(r[i], r[i], F) for _ in range(Q.mult[i])]
            cs[d * Q.mult[i] // dlt] = la.identity(r[i], F)
            coeffs[i] = cs
        out.append(LieElem.make(Q, F, coeffs))
    return out


# pairings --------------------------------------------------------------------


def trace_pairing(a: HomElem, b: HomElem):
    """``sum_l Tr(a_l b_{m_ij - 1 - l})`` for ``a: i -> j`` and ``b: j -> i``."""
    if (a.mi, a.mj, a.ri, a.rj) != (b.mj, b.mi, b.rj, b.ri):
        raise ShapeMismatch("trace pairing needs maps in opposite directions between the same modules")
    F = a.field
    g = a.m_ij
    acc = F.zero
    for l in range(g):
        acc = F.red(acc + la.trace(F, la.matmul(F, a.blocks[l], b.blocks[g - 1 - l])))
    return acc


def point_pairing(x: RepPoint, y: RepPoint):
    """Sum of trace pairings of ``x_a`` with ``y_{a*}``."""
    F = x.field
    acc = F.zero
    for a in x.quiver.arrows:
        acc = F.red(acc + trace_pairing(x[a.id], y[star(a.id)]))
    return acc


def lie_pairing(xi: LieElem, eta: LieElem):
    """``sum_i res Tr(xi_i eta_i)``, the coefficient of ``e^{m_i - 1}``."""
    F = xi.field
    acc = F.zero
    for i in xi.quiver.vertices:
        a, b = xi.xi[i], eta.xi[i]
        m = len(a)
        for d in range(m):
            acc = F.red(acc + la.trace(F, la.matmul(F, a[d], b[m - 1 - d])))
    return acc


def in_gl0(gamma: LieElem) -> bool:
    """Orthogonal to the scalar subalgebra under :func:`lie_pairing`."""
    F = gamma.field
    return all(lie_pairing(b, gamma) == F.zero for b in delta_lie_basis(gamma.quiver, gamma.rank, F))


# cotangent points ------------------------------------------------------------


@dataclass(frozen=True)
class CotangentPoint:
    x: RepPoint
    y: RepPoint

    def __post_init__(self):
        Q = self.x.quiver
        if self.y.quiver != opposite_quiver(Q):
            raise ShapeMismatch("y must live on the opposite quiver")
        if self.x.r != self.y.r or self.x.field != self.y.field:
            raise ShapeMismatch("x and y need the same rank vector and field")

    @property
    def quiver(self) -> QuiverWithMult:
        return self.x.quiver

    @property
    def field(self) -> Field:
        return self.x.field

    @property
    def r(self) -> dict:
        return self.x.r

    def doubled(self) -> RepPoint:
        """The same data as a point on the doubled quiver."""
        Q = self.quiver
        maps = dict(self.x.x)
        maps.update(self.y.x)
        return RepPoint.make(double_quiver(Q), self.r, self.field, maps)

    @classmethod
    def from_doubled(cls, Q: QuiverWithMult, p: RepPoint) -> "CotangentPoint":
        x = RepPoint.make(Q, p.r, p.field, {a.id: p[a.id] for a in Q.arrows})
        Qop = opposite_quiver(Q)
        y = RepPoint.make(Qop, p.r, p.field, {a.id: p[a.id] for a in Qop.arrows})
        return cls(x, y)


def zero_cotangent(Q: QuiverWithMult, r, F: Field) -> CotangentPoint:
    return CotangentPoint(zero_point(Q, r, F), zero_point(opposite_quiver(Q), r, F))


def random_cotangent(Q: QuiverWithMult, r, F: Field, rng: _random.Random) -> CotangentPoint:
    return CotangentPoint(random_point(Q, r, F, rng), random_point(opposite_quiver(Q), r, F, rng))


def act_cotangent(g, p: CotangentPoint) -> CotangentPoint:
    from .rep import act

    return CotangentPoint.from_doubled(p.quiver, act(_on(g, double_quiver(p.quiver)), p.doubled()))


def _on(g, Q: QuiverWithMult):
    from .rep import GroupElem

    return GroupElem(Q, g.field, g.item_coeffs)


# infinitesimal action and moment map -----------------------------------------


def infinitesimal_action(xi: LieElem, x: RepPoint) -> RepPoint:
    """``(xi_t x_a - x_a xi_s)_a``."""
    F, Q = x.field, x.quiver
    exp = {i: xi.expanded(i) for i in Q.vertices}
    maps = {}
    for a in Q.arrows:
        h = x[a.id]
        if h.ri == 0 or h.rj == 0:
            maps[a.id] = h
            continue
        X = expand_full(h)
        Y = la.sub(F, la.matmul(F, exp[a.target], X), la.matmul(F, X, exp[a.source]))
        maps[a.id] = compress_full(F, Y, h.mi, h.mj, h.ri, h.rj)
    return x.replace(maps)


def _symmetrise(F: Field, P: list, m: int, r: int, f: int) -> list:
    """``sum_{k < f} e^k P e^{f - 1 - k}`` on ``k_m^r``."""
    acc = la.zeros(m * r, m * r, F)
    for k in range(f):
        term = la.matmul(F, la.matmul(F, eps_power_matrix(F, m, r, k), P), eps_power_matrix(F, m, r, f - 1 - k))
        acc = la.add(F, acc, term)
    return acc


def moment_map(p: CotangentPoint) -> LieElem:
    """Incoming terms ``x_a y_a`` minus outgoing terms ``y_a x_a``, each made ``k_{m_i}``-linear."""
    Q, F, r = p.quiver, p.field, p.r
    mats = {i: la.zeros(Q.mult[i] * r[i], Q.mult[i] * r[i], F) for i in Q.vertices}
    for a in Q.arrows:
        i, j = a.source, a.target
        if not r[i] or not r[j]:
            continue
        X = expand_full(p.x[a.id])
        Y = expand_full(p.y[star(a.id)])
        # a: i -> j is incoming at j and outgoing at i
        mats[j] = la.add(F, mats[j], _symmetrise(F, la.matmul(F, X, Y), Q.mult[j], r[j], Q.f_ij(a)))
        mats[i] = la.sub(F, mats[i], _symmetrise(F, la.matmul(F, Y, X), Q.mult[i], r[i], Q.f_ji(a)))
    return lie_from_expanded(Q, F, mats, r)


# fibres ----------------------------------------------------------------------


@dataclass(frozen=True)
class AffineSolution:
    """``particular + span(kernel)``, or empty when ``particular`` is ``None``."""

    particular: RepPoint | None
    kernel: tuple

    @property
    def empty(self) -> bool:
        return self.particular is None

    @property
    def dimension(self) -> int | None:
        return None if self.empty else len(self.kernel)

    def to_dict(self) -> dict:
        from .rep import point_dict

        if self.empty:
            return {"empty": True}
        return {
            "empty": False,
            "dimension": len(self.kernel),
            "particular": point_dict(self.particular),
            "kernel": [point_dict(k) for k in self.kernel],
        }


def moment_linear_system(x: RepPoint) -> list:
    """Matrix (rows: coordinates of mu, columns: coordinates of y) of ``y -> mu(x, y)``."""
    Q, F, r = x.quiver, x.field, x.r
    Qop = opposite_quiver(Q)
    n = point_ncoords(Qop, r)
    cols = []
    for k in range(n):
        e = [F.zero] * n
        e[k] = F.one
        y = point_from_coords(Qop, r, F, e)
        cols.append(list(moment_map(CotangentPoint(x, y)).coords()))
    nrows = len(cols[0]) if cols else len(LieElem.zero(Q, r, F).coords())
    return [[cols[k][row] for k in range(n)] for row in range(nrows)]


def moment_fiber_solve(x: RepPoint, gamma: LieElem) -> AffineSolution:
    """``{y : mu(x, y) = gamma}``; ``gamma`` must pair to zero with the scalar subalgebra."""
    if not in_gl0(gamma):
        raise GammaNotInGl0("gamma pairs nontrivially with the scalar subalgebra")
    Q, F, r = x.quiver, x.field, x.r
    Qop = opposite_quiver(Q)
    n = point_ncoords(Qop, r)
    A = moment_linear_system(x)
    b = list(gamma.coords())
    sol = la.solve(F, A, b) if A else ([F.zero] * n if not any(b) else None)
    if sol is None:
        return AffineSolution(None, ())
    ker = la.nullspace(F, A, ncols=n) if A else [[F.one if k == c else F.zero for k in range(n)] for c in range(n)]
    return AffineSolution(
        point_from_coords(Qop, r, F, sol),
        tuple(point_from_coords(Qop, r, F, v) for v in ker),
    )


# gradings --------------------------------------------------------------------


def _line_constant(Q: QuiverWithMult, alpha: Mapping) -> int:
    vals = {alpha[i] * Q.mult[i] for i in Q.vertices}
    if len(vals) != 1:
        raise AlphaNotOnLine(f"alpha_i m_i takes the values {sorted(vals)}")
    return vals.pop()


def revised_beta(Q: QuiverWithMult, alpha, C: int = 1) -> dict:
    """``beta_a = alpha_i (f_ji - 1)`` and ``beta_{a*} = alpha_i + C`` for ``a: i -> j``."""
    alpha = as_vector(Q, alpha, "alpha")
    _line_constant(Q, alpha)
    if C <= 0:
        raise AlphaNotOnLine("C must be positive")
    out = {}
    for a in Q.arrows:
        out[a.id] = alpha[a.source] * (Q.f_ji(a) - 1)
        out[star(a.id)] = alpha[a.source] + C
    return out


def equivariance_weights(Q: QuiverWithMult, alpha, beta: Mapping, C: int | None = None) -> dict:
    """``w_a = beta_a + beta_{a*} - alpha_j (f_ij - 1)`` and ``w_{a*} = beta_a + beta_{a*} - alpha_i (f_ji - 1)``.

    With ``C`` given, also report whether ``beta`` is the revised choice and,
    if so, confirm ``w_a = alpha_j + C`` and ``w_{a*} = alpha_i + C``.
    """
    alpha = as_vector(Q, alpha, "alpha")
    _line_constant(Q, alpha)
    out = {}
    for a in Q.arrows:
        i, j = a.source, a.target
        s = beta[a.id] + beta[star(a.id)]
        out[a.id] = {
            "w_a": s - alpha[j] * (Q.f_ij(a) - 1),
            "w_a*": s - alpha[i] * (Q.f_ji(a) - 1),
        }
    report = {"weights": out}
    if C is not None:
        rb = revised_beta(Q, alpha, C)
        report["revised_beta"] = rb
        revised = all(beta[k] == v for k, v in rb.items())
        report["is_revised"] = revised
        if revised:
            for a in Q.arrows:
                assert out[a.id]["w_a"] == alpha[a.target] + C
                assert out[a.id]["w_a*"] == alpha[a.source] + C
    return report


def doubled_params(Q: QuiverWithMult, alpha, beta: Mapping) -> tuple[GradingParams, GradingParams]:
    """Grading parameters for ``x`` on ``Q`` and ``y`` on the opposite quiver."""
    alpha = as_vector(Q, alpha, "alpha")
    px = GradingParams(tuple(alpha.items()), tuple((a.id, beta[a.id]) for a in Q.arrows))
    Qop = opposite_quiver(Q)
    py = GradingParams(tuple(alpha.items()), tuple((a.id, beta[a.id]) for a in Qop.arrows))
    check_params(Q, px)
    return px, py


def act_gm_cotangent(t, p: CotangentPoint, alpha, beta: Mapping) -> CotangentPoint:
    px, py = doubled_params(p.quiver, alpha, beta)
    return CotangentPoint(act_gm(t, p.x, px), act_gm(t, p.y, py))


def act_gm_lie(t, xi: LieElem, alpha, shift: Mapping | int) -> LieElem:
    """Scale the ``e^d`` coefficient at vertex ``i`` by ``t^(alpha_i d + shift_i)``."""
    Q, F = xi.quiver, xi.field
    alpha = as_vector(Q, alpha, "alpha")
    sh = shift if isinstance(shift, Mapping) else {i: shift for i in Q.vertices}
    out = {}
    for i, cs in xi.item_coeffs:
        out[i] = [la.scale(F, F.pow(t, alpha[i] * d + sh[i]), c) for d, c in enumerate(cs)]
    return LieElem.make(Q, F, out)


def act_gm_lie_revised(t, xi: LieElem, alpha, C: int = 1) -> LieElem:
    """The action ``t *_{alpha, alpha + C}`` on the Lie algebra."""
    alpha = as_vector(xi.quiver, alpha, "alpha")
    return act_gm_lie(t, xi, alpha, {i: alpha[i] + C for i in xi.quiver.vertices})


# modified stability ----------------------------------------------------------


def semistable_pi(p: CotangentPoint, theta, rho=None, guard: int = DEFAULT_GUARD) -> Verdict:
    """King on the truncation of the ``Q``-part, then the free ``rho`` scan on the doubled point."""
    Q = p.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    _check_orthogonal("theta", theta, p.r)
    _check_orthogonal("rho", rho, p.r)
    k = king_semistable(truncate(p.x), theta, guard)
    if not k.semistable:
        return Verdict(UNSTABLE, k.witness, "truncation of the Q-part is theta-unstable")
    return condition_two(p.doubled(), theta, rho, guard)


def semistable_pi_oracle(p: CotangentPoint, theta, rho=None, guard: int = 2**16) -> Verdict:
    """Definition-level check: twisted submodules of ``x`` only, free submodules of the doubled point."""
    Q = p.quiver
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    _check_orthogonal("theta", theta, p.r)
    _check_orthogonal("rho", rho, p.r)
    first = direct_condition_one(p.x, theta, guard)
    if not first.semistable:
        return first
    return direct_condition_two(p.doubled(), theta, rho, guard)


def parse_gamma(Q: QuiverWithMult, r, F: Field, data: Mapping | None) -> LieElem:
    """``{vertex: [coefficients of gamma_i]}``; missing vertices are zero."""
    return LieElem.scalar(Q, r, F, dict(data or {}))
