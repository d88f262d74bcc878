"""Point counts over finite fields, orbit counting and polynomial fits.

Two counting methods are offered.  ``exhaustive`` runs the full stability
test on every point.  ``factored`` applies only when no proper rank vector
``r'`` has ``theta . r' = 0``: then the free-subrepresentation condition is
vacuous, stability depends only on the truncation, and the count is the
number of King-semistable classical points times the size of each fibre of
the truncation map.  In Nakajima mode the fibre of the moment map over
``x`` is an affine space whose dimension is read off from the rank of the
infinitesimal action at ``x`` (the two maps are transpose to each other
under the trace pairings).
"""

from __future__ import annotations

import itertools
import json
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import linalg as la
from .errors import InsufficientData, NotPolynomial, TooLarge, Unsupported
from .fields import Field, PrimeField
from .quiver import (
    QuiverWithMult,
    as_vector,
    classical_dimension,
    dot,
    euler_form,
    is_generic,
    is_indivisible,
    opposite_quiver,
    rep_dimension,
    subvectors,
)
from .rep import (
    DEFAULT_GUARD,
    act,
    classical_from_coords,
    point_from_coords,
    point_ncoords,
    truncate,
)
from .stability import king_semistable, semistable_mult

MODES = ("ordinary", "pi", "nakajima")
METHODS = ("auto", "factored", "exhaustive")


def default_guard() -> int:
    """``QMULT_GUARD`` from the environment, else ``2^26``."""
    raw = os.environ.get("QMULT_GUARD")
    return int(raw) if raw else DEFAULT_GUARD


# group orders ----------------------------------------------------------------


def gl_order(r: int, q: int) -> int:
    out = 1
    for k in range(r):
        out *= q**r - q**k
    return out


def group_order(Q: QuiverWithMult, r, q: int) -> dict:
    """``|GL_{m,r}(F_q)|``, ``|Delta_m(F_q)|`` and their quotient."""
    r = as_vector(Q, r, "rank")
    gl = 1
    for i in Q.vertices:
        gl *= gl_order(r[i], q) * q ** ((Q.mult[i] - 1) * r[i] ** 2)
    delta = (q - 1) * q ** (Q.delta - 1)
    return {"gl": gl, "delta": delta, "g": gl // delta}


def expected_dimension(Q: QuiverWithMult, r, mode: str = "ordinary") -> int:
    """``delta - <r, r>``, doubled in Nakajima mode."""
    r = as_vector(Q, r, "rank")
    d = Q.delta - euler_form(Q, r, r)
    return 2 * d if mode == "nakajima" else d


# reports ---------------------------------------------------------------------


def _render_fraction(x: Fraction | None):
    if x is None:
        return None
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class CountReport:
    q: int
    mode: str
    method: str
    total: int
    semistable: int
    gl: int
    delta: int
    g: int
    freeness: str
    moduli: Fraction
    expected_dimension: int
    notes: list = field(default_factory=list)
    s_classes: int | None = None

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "mode": self.mode,
            "method": self.method,
            "total": self.total,
            "semistable": self.semistable,
            "group_order": self.gl,
            "delta_order": self.delta,
            "quotient_group_order": self.g,
            "freeness": self.freeness,
            "moduli": _render_fraction(self.moduli),
            "expected_dimension": self.expected_dimension,
            "notes": list(self.notes),
            "s_equivalence_classes": self.s_classes,
        }


# freeness --------------------------------------------------------------------


def freeness_status(Q: QuiverWithMult, r, theta, rho, F: Field, guard: int) -> tuple[str, list]:
    """``verified_free`` when ``r`` is indivisible, the pair is generic and the scalar-stabiliser scan passes."""
    from .stabilizers import check_assumption_U

    notes = []
    if not is_indivisible(r):
        notes.append("rank vector is divisible")
        return "unchecked", notes
    if is_generic(theta, rho, r) == "neither":
        notes.append("stability pair is not generic")
        return "unchecked", notes
    try:
        scan = check_assumption_U(Q, r, theta, F, guard)
    except TooLarge:
        notes.append("scalar-stabiliser scan exceeds the guard")
        return "unchecked", notes
    if not scan["holds"]:
        notes.append("a semistable truncation has a unipotent stabiliser outside the scalars")
        return "not_free", notes
    return "verified_free", notes


# index helpers ---------------------------------------------------------------


def _truncation_positions(Q: QuiverWithMult, r: Mapping) -> list:
    """For each classical coordinate, its position among the point coordinates."""
    n = point_ncoords(Q, r)
    F = PrimeField(2)
    ncl = classical_dimension(Q, r)
    pos = [None] * ncl
    for k in range(n):
        e = [0] * n
        e[k] = 1
        v = truncate(point_from_coords(Q, r, F, e)).coords()
        for c, val in enumerate(v):
            if val:
                pos[c] = k
    if any(p is None for p in pos):  # pragma: no cover
        raise AssertionError("truncation does not read a coordinate")
    return pos


def _king_table(Q: QuiverWithMult, r: Mapping, theta: Mapping, F: Field, guard: int) -> np.ndarray:
    """Boolean table over classical points (base-q index, first coordinate most significant)."""
    ncl = classical_dimension(Q, r)
    q = F.order
    if q**ncl > guard:
        raise TooLarge(f"{q}^{ncl} classical points exceed the guard {guard}")
    table = np.zeros(q**ncl, dtype=bool)
    for idx, vals in enumerate(itertools.product(range(q), repeat=ncl)):
        table[idx] = king_semistable(classical_from_coords(Q, r, F, vals), theta, guard).semistable
    return table


def _digits(indices: np.ndarray, q: int, n: int) -> np.ndarray:
    """Base-q digits, most significant first, shape ``(len(indices), n)``."""
    out = np.empty((len(indices), n), dtype=np.int64)
    rest = indices.copy()
    for k in range(n - 1, -1, -1):
        out[:, k] = rest % q
        rest //= q
    return out


def _condition_two_vacuous(r: Mapping, theta: Mapping) -> bool:
    return not any(
        dot(s, theta) == 0 for s in subvectors(r) if any(s.values()) and s != dict(r)
    )


# batched linear algebra mod p ------------------------------------------------


def batched_rank_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of matrices over ``F_p`` (shape ``(N, rows, cols)``)."""
    A = np.array(A, dtype=np.int64) % p
    N, R, C = A.shape
    rank = np.zeros(N, dtype=np.int64)
    inv = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.int64)
    rows = np.arange(R)
    items = np.arange(N)
    for c in range(C):
        cand = (A[:, :, c] != 0) & (rows[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        sel = items[has]
        pr, tr = piv[has], rank[has]
        # swap pivot row into position ``rank``
        tmp = A[sel, pr, :].copy()
        A[sel, pr, :] = A[sel, tr, :]
        A[sel, tr, :] = tmp
        # normalise and clear the column below
        prow = (A[sel, tr, :] * inv[A[sel, tr, c]][:, None]) % p
        A[sel, tr, :] = prow
        below = rows[None, :] > tr[:, None]
        factors = np.where(below, A[sel, :, c], 0)
        A[sel] = (A[sel] - factors[:, :, None] * prow[:, None, :]) % p
        rank[has] += 1
    return rank


def _action_tensor(Q: QuiverWithMult, r: Mapping, F: Field) -> np.ndarray:
    """``T[k]`` = matrix of ``xi -> xi . e_k`` (rows: point coordinates, columns: Lie coordinates)."""
    from .symplectic import LieElem, infinitesimal_action

    n = point_ncoords(Q, r)
    basis = []
    for i in Q.vertices:
        for d in range(Q.mult[i]):
            for p in range(r[i]):
                for qq in range(r[i]):
                    coeffs = {j: [la.zeros(r[j], r[j], F) for _ in range(Q.mult[j])] for j in Q.vertices}
                    coeffs[i][d][p][qq] = F.one
                    basis.append(LieElem.make(Q, F, coeffs))
    T = np.zeros((n, n, len(basis)), dtype=np.int64)
    for k in range(n):
        e = [F.zero] * n
        e[k] = F.one
        x = point_from_coords(Q, r, F, e)
        for c, xi in enumerate(basis):
            T[k, :, c] = infinitesimal_action(xi, x).coords()
    return T


# counting --------------------------------------------------------------------


def _exhaustive_chunk(args) -> tuple[int, int]:
    Q, r, theta, rho, F, mode, start, stop, guard = args
    n_x = point_ncoords(Q, r)
    q = F.order
    cache: dict = {}
    ss = 0
    if mode == "ordinary":
        for idx in range(start, stop):
            vals = _index_to_digits(idx, q, n_x)
            x = point_from_coords(Q, r, F, vals)
            if semistable_mult(x, theta, rho, guard, king_cache=cache).semistable:
                ss += 1
        return stop - start, ss
    from .symplectic import CotangentPoint, moment_map, semistable_pi

    Qop = opposite_quiver(Q)
    gamma = mode[1] if isinstance(mode, tuple) else None
    for idx in range(start, stop):
        vals = _index_to_digits(idx, q, 2 * n_x)
        p = CotangentPoint(point_from_coords(Q, r, F, vals[:n_x]), point_from_coords(Qop, r, F, vals[n_x:]))
        if gamma is not None and moment_map(p) != gamma:
            continue
        if semistable_pi(p, theta, rho, guard).semistable:
            ss += 1
    return stop - start, ss


def _index_to_digits(idx: int, q: int, n: int) -> list:
    out = [0] * n
    for k in range(n - 1, -1, -1):
        idx, out[k] = divmod(idx, q)
    return out


def _params_key(Q, r, theta, rho, F, mode, gamma) -> str:
    return json.dumps(
        {
            "quiver": Q.to_dict(),
            "r": r,
            "theta": theta,
            "rho": rho,
            "field": F.spec,
            "mode": mode,
            "gamma": None if gamma is None else list(gamma.coords()),
        },
        sort_keys=True,
    )


def _run_exhaustive(Q, r, theta, rho, F, mode, gamma, n_total, guard, workers, checkpoint) -> int:
    chunk = max(1, min(65536, n_total // max(1, 8 * workers)))
    key = _params_key(Q, r, theta, rho, F, mode, gamma)
    cursor, ss = 0, 0
    path = Path(checkpoint) if checkpoint else None
    if path is not None and path.exists():
        saved = json.loads(path.read_text())
        if saved.get("key") == key:
            cursor, ss = saved["cursor"], saved["semistable"]
    tag = mode if mode != "nakajima" else ("nakajima", gamma)
    jobs = [
        (Q, r, theta, rho, F, tag, s, min(s + chunk, n_total), guard) for s in range(cursor, n_total, chunk)
    ]

    def save(cur: int, count: int) -> None:
        if path is not None:
            path.write_text(json.dumps({"key": key, "cursor": cur, "semistable": count, "total": n_total}))

    if workers > 1 and len(jobs) > 1:
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            for (done, found), job in zip(pool.imap(_exhaustive_chunk, jobs), jobs):
                ss += found
                save(job[7], ss)
    else:
        for job in jobs:
            _, found = _exhaustive_chunk(job)
            ss += found
            save(job[7], ss)
    return ss


def _factored_ordinary(Q, r, theta, F, guard) -> int:
    table = _king_table(Q, r, theta, F, guard)
    extra = rep_dimension(Q, r) - classical_dimension(Q, r)
    return int(table.sum()) * F.order**extra


def _factored_nakajima(Q, r, theta, F, gamma, guard, batch: int = 1 << 15) -> int:
    """``sum`` over King-semistable ``x`` of the number of ``y`` in the moment fibre."""
    from .symplectic import moment_fiber_solve

    q = F.order
    n_x = point_ncoords(Q, r)
    if q**n_x > guard:
        raise TooLarge(f"{q}^{n_x} points exceed the guard {guard}")
    table = _king_table(Q, r, theta, F, guard)
    pos = np.array(_truncation_positions(Q, r), dtype=np.int64)
    weights = q ** np.arange(len(pos) - 1, -1, -1, dtype=np.int64)
    total = 0
    if gamma is None or gamma.is_zero():
        T = _action_tensor(Q, r, F)
        flat = T.reshape(n_x, -1)
        for start in range(0, q**n_x, batch):
            idx = np.arange(start, min(start + batch, q**n_x), dtype=np.int64)
            X = _digits(idx, q, n_x)
            keep = table[(X[:, pos] * weights).sum(axis=1)] if len(pos) else np.full(len(idx), bool(table[0]))
            X = X[keep]
            if not len(X):
                continue
            A = ((X @ flat) % q).reshape(len(X), n_x, -1)
            ranks = batched_rank_mod_p(A, q)
            # the moment fibre over x has dimension dim R - rank(action at x)
            vals, counts = np.unique(n_x - ranks, return_counts=True)
            total += sum(int(c) * q ** int(v) for v, c in zip(vals, counts))
        return total
    for idx in range(q**n_x):
        vals = _index_to_digits(idx, q, n_x)
        key = sum(vals[p] * q ** (len(pos) - 1 - c) for c, p in enumerate(pos))
        if not table[key]:
            continue
        sol = moment_fiber_solve(point_from_coords(Q, r, F, vals), gamma)
        if not sol.empty:
            total += q ** sol.dimension
    return total


def count_semistable(
    Q: QuiverWithMult,
    r,
    theta,
    rho=None,
    F: Field | None = None,
    mode: str = "ordinary",
    gamma=None,
    method: str = "auto",
    guard: int | None = None,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
) -> CountReport:
    """Count ``(theta, rho)``-semistable points over ``F`` and divide by the group when free."""
    if F is None or not F.is_finite:
        raise Unsupported("counting needs a finite field")
    if mode not in MODES:
        raise Unsupported(f"unknown mode {mode!r}")
    if method not in METHODS:
        raise Unsupported(f"unknown method {method!r}")
    guard = default_guard() if guard is None else guard
    r = as_vector(Q, r, "rank")
    theta = as_vector(Q, theta, "theta")
    rho = as_vector(Q, rho, "rho")
    if mode == "nakajima" and gamma is None:
        from .symplectic import LieElem

        gamma = LieElem.zero(Q, r, F)
    q = F.order
    n_x = point_ncoords(Q, r)
    n_total = q ** (2 * n_x if mode != "ordinary" else n_x)
    vacuous = _condition_two_vacuous(r, theta)
    if method == "auto":
        method = "factored" if vacuous else "exhaustive"
    if method == "factored" and not vacuous:
        raise Unsupported("the factored count needs theta . r' != 0 for every proper r'")
    if method == "exhaustive" and n_total > guard:
        raise TooLarge(f"{n_total} points exceed the guard {guard}")
    if method == "factored":
        if mode == "ordinary":
            ss = _factored_ordinary(Q, r, theta, F, guard)
        elif mode == "pi":
            ss = _factored_ordinary(Q, r, theta, F, guard) * q**n_x
        else:
            ss = _factored_nakajima(Q, r, theta, F, gamma, guard)
    else:
        ss = _run_exhaustive(Q, r, theta, rho, F, mode, gamma, n_total, guard, workers, checkpoint)
    orders = group_order(Q, r, q)
    status, notes = freeness_status(Q, r, theta, rho, F, guard)
    if mode == "pi":
        notes.append("pi mode counts all doubled points; the moduli figure is a raw quotient")
    classes = None
    if status != "verified_free" and mode == "ordinary":
        try:
            classes = count_s_classes(Q, r, theta, rho, F, min(guard, STRICT_GUARD))
        except TooLarge:
            notes.append("S-equivalence classes not counted: exceeds the strict guard")
    return CountReport(
        q=q,
        mode=mode,
        method=method,
        total=n_total,
        semistable=ss,
        gl=orders["gl"],
        delta=orders["delta"],
        g=orders["g"],
        freeness=status,
        moduli=Fraction(ss, orders["g"]),
        expected_dimension=expected_dimension(Q, r, mode),
        notes=notes,
        s_classes=classes,
    )


def count_framed(Q: QuiverWithMult, framing, r, theta, F: Field, m_inf: int = 1, **kw) -> CountReport:
    """Semistable count on the framed quiver, with the framing vertex at rank 1."""
    from .quiver import build_framed

    fr = build_framed(Q, framing, r, m_inf)
    return count_semistable(fr.quiver, fr.rank, fr.theta_hat(theta), None, F, **kw)


# orbits ----------------------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def count_orbits(Q: QuiverWithMult, r, theta, rho, F: Field, guard: int = 10**6) -> dict:
    """Orbits of the group on semistable points, by union-find over a full group sweep."""
    from .rep import enumerate_points
    from .stability import enumerate_group

    r = as_vector(Q, r, "rank")
    points = [x for x in enumerate_points(Q, r, F, guard) if semistable_mult(x, theta, rho).semistable]
    index = {x.coords(): k for k, x in enumerate(points)}
    group = list(enumerate_group(Q, r, F, guard))
    if len(points) * len(group) > guard:
        raise TooLarge("orbit sweep exceeds the guard")
    uf = _UnionFind(len(points))
    for k, x in enumerate(points):
        for g in group:
            uf.union(k, index[act(g, x).coords()])
    roots = [uf.find(k) for k in range(len(points))]
    sizes: dict = {}
    for root in roots:
        sizes[root] = sizes.get(root, 0) + 1
    return {"semistable": len(points), "orbits": len(sizes), "orbit_sizes": sorted(sizes.values())}


STRICT_GUARD = 2**16


def count_s_classes(Q: QuiverWithMult, r, theta, rho, F: Field, guard: int = STRICT_GUARD) -> int:
    """Number of S-equivalence classes: orbits of polystable points, found by a group sweep."""
    from .rep import enumerate_points
    from .stability import enumerate_group, polystable

    r = as_vector(Q, r, "rank")
    if F.order ** point_ncoords(Q, r) * group_order(Q, r, F.order)["gl"] > guard:
        raise TooLarge("S-equivalence count exceeds the guard")
    points = [
        x
        for x in enumerate_points(Q, r, F, guard)
        if semistable_mult(x, theta, rho).semistable and polystable(x, theta, rho)
    ]
    index = {x.coords(): k for k, x in enumerate(points)}
    uf = _UnionFind(len(points))
    for g in enumerate_group(Q, r, F, guard):
        for k, x in enumerate(points):
            uf.union(k, index[act(g, x).coords()])
    return len({uf.find(k) for k in range(len(points))})


# polynomial fits -------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple  # Fractions, constant term first

    @property
    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coeffs) if c]
        return nz[-1] if nz else -1

    def __call__(self, q) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def to_dict(self) -> dict:
        d = self.degree
        return {"degree": d, "coefficients": [_render_fraction(c) for c in self.coeffs[: d + 1]]}


def poly_fit(points: Sequence, degree_bound: int) -> Polynomial:
    """Interpolate through the first ``degree_bound + 1`` points; the rest are held out."""
    from .fields import QQ

    pts = [(Fraction(q), Fraction(c)) for q, c in points]
    if len({q for q, _ in pts}) != len(pts):
        raise InsufficientData("repeated q values")
    if len(pts) < 2 or len(pts) < degree_bound + 1:
        raise InsufficientData(f"need at least {max(2, degree_bound + 1)} points, got {len(pts)}")
    fit, held = pts[: degree_bound + 1], pts[degree_bound + 1 :]
    V = [[q**k for k in range(degree_bound + 1)] for q, _ in fit]
    sol = la.solve(QQ, V, [c for _, c in fit])
    poly = Polynomial(tuple(Fraction(c) for c in sol))
    for q, c in held:
        if poly(q) != c:
            raise NotPolynomial(f"held-out q={q} gives {c}, fit predicts {poly(q)}")
    return poly


def primes_up_to(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]
