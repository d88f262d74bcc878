"""External gradings: multiplicative-group actions that scale e-coefficients.

For parameters ``alpha`` (per vertex) and ``beta`` (per arrow), the
coefficient of ``x_a`` carrying source power ``e_s`` to target power ``e_t``
is scaled by ``t^(alpha_j e_t - alpha_i e_s + beta_a)``.  On groups, the
coefficient ``g_d`` of ``e^d`` at vertex ``i`` is scaled by
``t^(alpha_i d)``.  Weights are tracked as integers; nothing is evaluated at
sample values of ``t`` to find them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import linalg as la
from .errors import InvalidParams
from .fields import Field
from .quiver import QuiverWithMult, as_vector, canonical_alpha, thick_weight
from .rep import ClassicalRep, GroupElem, HomElem, RepPoint, thicken_coords


@dataclass(frozen=True)
class GradingParams:
    alpha: tuple  # ((vertex, alpha_i), ...)
    beta: tuple  # ((arrow id, beta_a), ...)

    @property
    def a(self) -> dict:
        return dict(self.alpha)

    @property
    def b(self) -> dict:
        return dict(self.beta)

    def scale(self) -> dict:
        return dict(self.alpha)

    def to_dict(self) -> dict:
        return {"alpha": self.a, "beta": self.b}


def default_beta(Q: QuiverWithMult, alpha: Mapping) -> dict:
    return {a.id: alpha[a.source] * (Q.f_ji(a) - 1) for a in Q.arrows}


def make_params(Q: QuiverWithMult, alpha=None, beta: Mapping | None = None) -> GradingParams:
    alpha = canonical_alpha(Q) if alpha is None else as_vector(Q, alpha, "alpha")
    if any(v <= 0 for v in alpha.values()):
        raise InvalidParams("alpha must be positive")
    b = default_beta(Q, alpha)
    if beta:
        b.update({str(k): int(v) for k, v in beta.items()})
    return GradingParams(tuple(alpha.items()), tuple((a.id, b[a.id]) for a in Q.arrows))


def canonical_params(Q: QuiverWithMult) -> GradingParams:
    """``alpha_i = M / m_i`` and ``beta_a = alpha_i (f_ji - 1)``."""
    return make_params(Q)


def line_violation(Q: QuiverWithMult, p: GradingParams) -> dict | None:
    """A coordinate whose two Toeplitz copies receive different weights, if any.

    This happens exactly on arrows with ``gcd(m_i, m_j) > 1`` where
    ``alpha_i m_i != alpha_j m_j``.
    """
    al, be = p.a, p.b
    for a in Q.arrows:
        if Q.m_ij(a) == 1:
            continue
        ai, aj = al[a.source], al[a.target]
        es, et = Q.f_ji(a) - 1, Q.f_ij(a) - 1
        w1 = aj * et - ai * es + be[a.id]
        w2 = aj * (et + Q.f_ij(a)) - ai * (es + Q.f_ji(a)) + be[a.id]
        if w1 != w2:
            return {
                "arrow": a.id,
                "positions": [[es, et], [es + Q.f_ji(a), et + Q.f_ij(a)]],
                "weights": [w1, w2],
            }
    return None


def check_params(Q: QuiverWithMult, p: GradingParams) -> None:
    bad = line_violation(Q, p)
    if bad is not None:
        raise InvalidParams(
            f"alpha_i m_i must agree across arrow {bad['arrow']} (weights {bad['weights'][0]} vs {bad['weights'][1]})"
        )


def is_valid(Q: QuiverWithMult, p: GradingParams) -> bool:
    """Line condition where needed and ``beta_a >= alpha_i (f_ji - 1)``."""
    if line_violation(Q, p) is not None:
        return False
    al, be = p.a, p.b
    return all(be[a.id] >= al[a.source] * (Q.f_ji(a) - 1) for a in Q.arrows)


def weight_table(Q: QuiverWithMult, r=None, p: GradingParams | None = None) -> dict:
    """Weight of every thickened coordinate ``(a, m, f1, f2)``."""
    del r  # weights do not depend on the rank vector
    p = p or canonical_params(Q)
    al, be = p.a, p.b
    out = {}
    for a in Q.arrows:
        for m in range(Q.m_ij(a)):
            for f1 in range(Q.f_ji(a)):
                for f2 in range(Q.f_ij(a)):
                    out[(a.id, m, f1, f2)] = thick_weight(Q, a, m, f1, f2, al, be[a.id])
    return out


def _hom_weights(Q: QuiverWithMult, a, h: HomElem, al: Mapping, beta: int) -> list:
    """Per stored entry of ``h``: the integer weight (same nesting as ``h.blocks``)."""
    ai, aj = al[a.source], al[a.target]
    out = []
    for l in range(h.m_ij):
        blk = []
        for p in range(h.f_ij):
            for s in range(h.rj):
                row = []
                for q in range(h.f_ji):
                    es, et = h.f_ji - 1 - q, l * h.f_ij + h.f_ij - 1 - p
                    w = aj * et - ai * es + beta
                    row.extend([w] * h.ri)
                blk.append(row)
        out.append(blk)
    return out


def act_gm(t, x: RepPoint, p: GradingParams, formal: bool = False):
    """``t * x``; with ``formal=True`` return the weight of every stored coordinate instead."""
    Q, F = x.quiver, x.field
    al, be = p.a, p.b
    if formal:
        # no validity check: this is how a bad alpha is diagnosed
        return {a.id: _hom_weights(Q, a, x[a.id], al, be[a.id]) for a in Q.arrows}
    check_params(Q, p)
    maps = {}
    for a in Q.arrows:
        h = x[a.id]
        W = _hom_weights(Q, a, h, al, be[a.id])
        blocks = tuple(
            tuple(tuple(F.red(c * F.pow(t, w)) for c, w in zip(row, wrow)) for row, wrow in zip(b, wb))
            for b, wb in zip(h.blocks, W)
        )
        maps[a.id] = HomElem(F, h.mi, h.mj, h.ri, h.rj, blocks)
    return x.replace(maps)


def act_gm_group(t, g: GroupElem, p: GradingParams) -> GroupElem:
    """Scale the coefficient of ``e^d`` at vertex ``i`` by ``t^(alpha_i d)``."""
    F = g.field
    al = p.a
    out = {}
    for i, cs in g.item_coeffs:
        out[i] = [la.scale(F, F.pow(t, al[i] * d), c) for d, c in enumerate(cs)]
    return GroupElem.make(g.quiver, F, out)


def limit_zero(x: RepPoint, p: GradingParams | None = None) -> ClassicalRep:
    """``lim_{t -> 0} t * x``, read off the weight-zero thickened coordinates.

    Requires ``beta`` at its default value so that every weight is
    nonnegative and the weight-zero coordinates are the truncation slots.
    """
    Q, F = x.quiver, x.field
    p = p or canonical_params(Q)
    check_params(Q, p)
    if dict(p.beta) != default_beta(Q, p.a):
        raise InvalidParams("the limit at zero needs beta_a = alpha_i (f_ji - 1)")
    weights = weight_table(Q, x.r, p)
    coords = thicken_coords(x)
    if any(w < 0 for w in weights.values()):
        raise InvalidParams("negative weights: the limit does not exist in general")
    maps = {}
    for a in Q.arrows:
        zero_keys = [k for k in weights if k[0] == a.id and weights[k] == 0]
        # exactly one weight-zero coordinate per arrow
        (key,) = zero_keys
        maps[a.id] = coords[key]
    return ClassicalRep.make(Q, x.r, F, maps)


def limit_zero_group(g: GroupElem) -> dict:
    """``lim_{t -> 0} t * g``: the constant terms."""
    return g.reduce()


def zero_weight_keys(Q: QuiverWithMult, p: GradingParams) -> list:
    return [k for k, w in weight_table(Q, None, p).items() if w == 0]


def lie_weight(alpha_i: int, d: int, shift: int) -> int:
    """Weight of the ``e^d`` coefficient of a Lie algebra element under ``t *_{alpha, alpha + C}``."""
    return alpha_i * d + shift


def parse_grading(spec: str) -> tuple[str, int]:
    """``"default"`` or ``"revised:C"``."""
    from .errors import ParseError

    if spec == "default":
        return "default", 0
    if spec.startswith("revised:"):
        try:
            C = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ParseError(f"bad grading {spec!r}") from exc
        if C <= 0:
            raise ParseError("revised grading needs C > 0")
        return "revised", C
    raise ParseError(f"bad grading {spec!r}; expected 'default' or 'revised:C'")


def field_unit(F: Field, t) -> object:
    t = F(t)
    if not t:
        raise InvalidParams("t must be a unit")
    return t
