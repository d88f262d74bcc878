"""JSON readers for points, classical representations, group and Lie elements.

Writers live next to the types (``point_dict`` and friends); everything here
accepts exactly what those writers emit and rejects unknown keys.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import ParseError, QmultError
from .fields import Field
from .quiver import QuiverWithMult, as_vector
from .rep import ClassicalRep, GroupElem, HomElem, RepPoint, classical_dict, point_dict


def _keys(data, allowed: set, what: str) -> None:
    if not isinstance(data, Mapping):
        raise ParseError(f"{what} must be a JSON object")
    extra = set(data) - allowed
    if extra:
        raise ParseError(f"unknown {what} keys: {sorted(extra)}")


def _matrix(F: Field, rows, what: str) -> list:
    if not isinstance(rows, list) or any(not isinstance(row, list) for row in rows):
        raise ParseError(f"{what} must be a list of rows")
    return [[F.parse(c) for c in row] for row in rows]


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_quiver(path: str | Path) -> QuiverWithMult:
    return QuiverWithMult.from_dict(load_json(path))


def fixture(name: str) -> QuiverWithMult:
    """A quiver shipped in ``qmult/data``, e.g. ``"kronecker-2-3"``."""
    text = resources.files("qmult").joinpath("data", f"{name}.json").read_text()
    return QuiverWithMult.from_dict(json.loads(text))


def parse_point(Q: QuiverWithMult, F: Field, data) -> RepPoint:
    _keys(data, {"rank", "arrows"}, "point")
    try:
        r = as_vector(Q, data["rank"], "rank")
        maps = {}
        for a in Q.arrows:
            entry = data["arrows"][a.id]
            _keys(entry, {"blocks"}, "arrow entry")
            blocks = [_matrix(F, b, f"block of {a.id}") for b in entry["blocks"]]
            maps[a.id] = HomElem(F, Q.mult[a.source], Q.mult[a.target], r[a.source], r[a.target], tuple(blocks))
        if set(data["arrows"]) - set(maps):
            raise ParseError(f"unknown arrows: {sorted(set(data['arrows']) - set(maps))}")
        return RepPoint.make(Q, r, F, maps)
    except KeyError as exc:
        raise ParseError(f"point is missing {exc}") from exc
    except QmultError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc


def parse_classical(Q: QuiverWithMult, F: Field, data) -> ClassicalRep:
    _keys(data, {"dim", "arrows"}, "classical representation")
    try:
        d = as_vector(Q, data["dim"], "dim")
        maps = {a.id: _matrix(F, data["arrows"][a.id], a.id) for a in Q.arrows}
        return ClassicalRep.make(Q, d, F, maps)
    except KeyError as exc:
        raise ParseError(f"classical representation is missing {exc}") from exc
    except QmultError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc


def group_dict(g: GroupElem) -> dict:
    F = g.field
    return {"vertices": {i: [[[F.render(c) for c in row] for row in A] for A in cs] for i, cs in g.item_coeffs}}


def parse_group(Q: QuiverWithMult, F: Field, data) -> GroupElem:
    """``{"vertices": {i: [g_0, ..., g_{m_i - 1}]}}``; missing higher coefficients are zero."""
    from . import linalg as la

    _keys(data, {"vertices"}, "group element")
    try:
        out = {}
        for i in Q.vertices:
            cs = [_matrix(F, A, f"coefficient at {i}") for A in data["vertices"][i]]
            if not cs or len(cs) > Q.mult[i]:
                raise ParseError(f"vertex {i} needs between 1 and {Q.mult[i]} coefficient matrices")
            n = len(cs[0])
            cs += [la.zeros(n, n, F) for _ in range(Q.mult[i] - len(cs))]
            out[i] = cs
        return GroupElem.make(Q, F, out)
    except KeyError as exc:
        raise ParseError(f"group element is missing {exc}") from exc


def parse_cotangent(Q: QuiverWithMult, F: Field, data):
    from .quiver import opposite_quiver
    from .symplectic import CotangentPoint

    _keys(data, {"x", "y"}, "cotangent point")
    try:
        return CotangentPoint(parse_point(Q, F, data["x"]), parse_point(opposite_quiver(Q), F, data["y"]))
    except KeyError as exc:
        raise ParseError(f"cotangent point is missing {exc}") from exc


def cotangent_dict(p) -> dict:
    return {"x": point_dict(p.x), "y": point_dict(p.y)}


__all__ = [
    "classical_dict",
    "cotangent_dict",
    "fixture",
    "group_dict",
    "load_json",
    "load_quiver",
    "parse_classical",
    "parse_cotangent",
    "parse_group",
    "parse_point",
    "point_dict",
]
