"""Dense exact linear algebra over a :class:`~qmult.fields.Field`.

Matrices are lists of rows; vectors are lists.  Functions never mutate
their arguments.  Only what the rest of the package needs is here:
products, row reduction, kernels, solving, inversion and subspace
enumeration over finite fields.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .errors import NonUnit, ShapeMismatch
from .fields import Field

Matrix = list
Vector = list


def zeros(rows: int, cols: int, F: Field) -> Matrix:
    return [[F.zero] * cols for _ in range(rows)]


def identity(n: int, F: Field) -> Matrix:
    out = zeros(n, n, F)
    for i in range(n):
        out[i][i] = F.one
    return out


def shape(A: Sequence[Sequence]) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def to_tuple(A) -> tuple:
    return tuple(tuple(row) for row in A)


def to_list(A) -> Matrix:
    return [list(row) for row in A]


def matmul(F: Field, A, B, inner: int | None = None) -> Matrix:
    """Product ``A @ B``; ``inner`` disambiguates when A has no rows."""
    n = len(A)
    k = len(A[0]) if n else (inner if inner is not None else len(B))
    if len(B) != k:
        raise ShapeMismatch(f"cannot multiply {n}x{k} by {len(B)}x?")
    cols = len(B[0]) if B else 0
    red = F.red
    out = []
    Bt = list(zip(*B)) if B else [() for _ in range(cols)]
    for row in A:
        nz = [(t, a) for t, a in enumerate(row) if a]
        out.append([red(sum(a * col[t] for t, a in nz)) for col in Bt] if nz else [F.zero] * cols)
    return out


def matvec(F: Field, A, v) -> Vector:
    red = F.red
    return [red(sum(a * b for a, b in zip(row, v) if a)) for row in A]


def add(F: Field, A, B) -> Matrix:
    red = F.red
    return [[red(a + b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def sub(F: Field, A, B) -> Matrix:
    red = F.red
    return [[red(a - b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale(F: Field, c, A) -> Matrix:
    red = F.red
    return [[red(c * a) for a in row] for row in A]


def transpose(A) -> Matrix:
    return [list(col) for col in zip(*A)]


def is_zero(A) -> bool:
    return all(not a for row in A for a in row)


def trace(F: Field, A):
    return F.red(sum(A[i][i] for i in range(len(A))))


def block(A, r0: int, r1: int, c0: int, c1: int) -> Matrix:
    return [list(row[c0:c1]) for row in A[r0:r1]]


def rref(F: Field, A, ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = [list(row) for row in A]
    rows = len(M)
    cols = len(M[0]) if rows else (ncols or 0)
    red, inv = F.red, F.inv
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        ic = inv(M[r][c])
        pr = M[r] = [red(a * ic) for a in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [red(a - f * b) for a, b in zip(M[i], pr)]
        pivots.append(c)
        r += 1
    return M, pivots


def rank(F: Field, A) -> int:
    if not A or not A[0]:
        return 0
    return len(rref(F, A)[1])


def nullspace(F: Field, A, ncols: int | None = None) -> list[Vector]:
    """Basis of ``{v : A v = 0}``."""
    cols = len(A[0]) if A else (ncols or 0)
    if not A:
        return [[F.one if i == j else F.zero for i in range(cols)] for j in range(cols)]
    R, pivots = rref(F, A)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [F.zero] * cols
        v[fc] = F.one
        for r, pc in enumerate(pivots):
            v[pc] = F.neg(R[r][fc])
        basis.append(v)
    return basis


def solve(F: Field, A, b, ncols: int | None = None) -> Vector | None:
    """One solution of ``A v = b`` or ``None`` when the system is inconsistent."""
    cols = len(A[0]) if A else (ncols or 0)
    if not A:
        return [F.zero] * cols
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, pivots = rref(F, aug)
    if cols in pivots:
        return None
    v = [F.zero] * cols
    for r, pc in enumerate(pivots):
        v[pc] = R[r][cols]
    return v


def inverse(F: Field, A) -> Matrix:
    n = len(A)
    aug = [list(row) + [F.one if i == j else F.zero for j in range(n)] for i, row in enumerate(A)]
    R, pivots = rref(F, aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n or pivots[n - 1] >= n:
        raise NonUnit("singular matrix")
    return [row[n:] for row in R]


def row_space_basis(F: Field, vectors: Sequence[Vector], dim: int) -> list[Vector]:
    """Reduced basis of the span of ``vectors`` inside ``F^dim``."""
    if not vectors:
        return []
    R, pivots = rref(F, [list(v) for v in vectors])
    return [R[i] for i in range(len(pivots))]


def in_span(F: Field, basis: Sequence[Vector], v: Vector) -> bool:
    if not any(v):
        return True
    if not basis:
        return False
    return rank(F, list(basis) + [list(v)]) == rank(F, list(basis))


def annihilator(F: Field, basis: Sequence[Vector], dim: int) -> Matrix:
    """Rows spanning the linear forms that vanish on ``span(basis)``.

    ``K v = 0`` then tests membership of ``v`` in the span.
    """
    if not basis:
        return identity(dim, F)
    return nullspace(F, [list(b) for b in basis], ncols=dim)


def span_elements(F: Field, basis: Sequence[Vector], dim: int) -> Iterator[tuple]:
    """All vectors in the span (finite fields only)."""
    elems = list(F.elements())
    for coeffs in itertools.product(elems, repeat=len(basis)):
        v = [F.zero] * dim
        for c, b in zip(coeffs, basis):
            if c:
                v = [F.red(x + c * y) for x, y in zip(v, b)]
        yield tuple(v)


def enumerate_subspaces(F: Field, n: int, k: int | None = None) -> Iterator[list[Vector]]:
    """Every subspace of ``F^n`` (or of dimension ``k``) once, as an RREF basis.

    Subspaces are produced Schubert cell by Schubert cell: a pivot set is
    fixed, pivot entries are 1, entries left of a pivot and in other pivot
    columns are 0, and the remaining entries run over the field.
    """
    elems = list(F.elements())
    dims = range(n + 1) if k is None else [k]
    for d in dims:
        for pivots in itertools.combinations(range(n), d):
            pivset = set(pivots)
            slots = [(r, c) for r, p in enumerate(pivots) for c in range(p + 1, n) if c not in pivset]
            for values in itertools.product(elems, repeat=len(slots)):
                rows = [[F.zero] * n for _ in range(d)]
                for r, p in enumerate(pivots):
                    rows[r][p] = F.one
                for (r, c), val in zip(slots, values):
                    rows[r][c] = val
                yield rows


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den
