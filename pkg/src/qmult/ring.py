"""Truncated polynomial rings ``k_m = k[e]/(e^m)``.

A :class:`TruncPoly` carries its field and a tuple of exactly ``m``
coefficients, lowest degree first.  Values are immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MismatchedRing, NonUnit, NotDivisible
from .fields import Field


@dataclass(frozen=True)
class TruncPoly:
    field: Field
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("truncation order must be positive")
        red = self.field.red
        object.__setattr__(self, "coeffs", tuple(red(c) for c in self.coeffs))

    # construction -------------------------------------------------------
    @classmethod
    def of(cls, field: Field, coeffs: Iterable, m: int | None = None) -> "TruncPoly":
        """Build from coefficients, padding with zeros (or truncating) to ``m``."""
        cs = [field(c) for c in coeffs]
        if m is None:
            m = max(len(cs), 1)
        cs = (cs + [field.zero] * m)[:m]
        return cls(field, tuple(cs))

    @classmethod
    def const(cls, field: Field, c, m: int) -> "TruncPoly":
        return cls.of(field, [c], m)

    @classmethod
    def zero(cls, field: Field, m: int) -> "TruncPoly":
        return cls(field, (field.zero,) * m)

    @classmethod
    def one(cls, field: Field, m: int) -> "TruncPoly":
        return cls.const(field, field.one, m)

    @classmethod
    def eps(cls, field: Field, m: int, power: int = 1) -> "TruncPoly":
        cs = [field.zero] * m
        if power < m:
            cs[power] = field.one
        return cls(field, tuple(cs))

    # basic properties ---------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return bool(self.coeffs[0])

    def valuation(self) -> int:
        """Smallest ``i`` with a nonzero coefficient; ``m`` for zero."""
        return next((i for i, c in enumerate(self.coeffs) if c), self.m)

    def _check(self, other: "TruncPoly") -> None:
        if not isinstance(other, TruncPoly):
            raise TypeError(f"expected TruncPoly, got {type(other).__name__}")
        if other.m != self.m or other.field != self.field:
            raise MismatchedRing(
                f"k_{self.m} over {self.field!r} vs k_{other.m} over {other.field!r}"
            )

    def _coerce(self, other) -> "TruncPoly":
        if isinstance(other, TruncPoly):
            self._check(other)
            return other
        return TruncPoly.const(self.field, other, self.m)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "TruncPoly":
        o = self._coerce(other)
        return TruncPoly(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other) -> "TruncPoly":
        o = self._coerce(other)
        return TruncPoly(self.field, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other) -> "TruncPoly":
        return self._coerce(other) - self

    def __neg__(self) -> "TruncPoly":
        return TruncPoly(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other) -> "TruncPoly":
        return tp_mul(self, self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "TruncPoly":
        return tp_mul(self, tp_inv(self._coerce(other)))

    def __pow__(self, e: int) -> "TruncPoly":
        if e < 0:
            return tp_inv(self) ** (-e)
        out = TruncPoly.one(self.field, self.m)
        base = self
        while e:
            if e & 1:
                out = tp_mul(out, base)
            base = tp_mul(base, base)
            e >>= 1
        return out

    def shift(self, d: int) -> "TruncPoly":
        """Multiply by ``e^d``."""
        if d <= 0:
            return self
        z = self.field.zero
        return TruncPoly(self.field, ((z,) * d + self.coeffs)[: self.m])

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"TruncPoly({render(self)!r}, m={self.m}, {self.field!r})"


def tp_mul(a: TruncPoly, b: TruncPoly) -> TruncPoly:
    """Product in ``k_m``: convolution truncated at degree ``m``."""
    a._check(b)
    m = a.m
    ac, bc = a.coeffs, b.coeffs
    out = []
    for n in range(m):
        out.append(sum(ac[i] * bc[n - i] for i in range(n + 1) if ac[i] and bc[n - i]))
    return TruncPoly(a.field, tuple(out))


def tp_inv(a: TruncPoly) -> TruncPoly:
    """Inverse of a unit, by the recursion ``b_n = -a_0^{-1} sum_{i>=1} a_i b_{n-i}``."""
    F = a.field
    if not a.coeffs[0]:
        raise NonUnit(f"{render(a)} has zero constant term")
    inv0 = F.inv(a.coeffs[0])
    b = [inv0]
    for n in range(1, a.m):
        s = sum(a.coeffs[i] * b[n - i] for i in range(1, n + 1))
        b.append(F.red(-inv0 * s))
    return TruncPoly(F, tuple(b))


def residue(a: TruncPoly):
    """Top coefficient: the residue of ``e^{-m} a(e)``."""
    return a.coeffs[-1]


def embed_subring(a: TruncPoly, m: int) -> TruncPoly:
    """Image of ``a`` under ``k_d -> k_m``, ``e -> e^{m/d}``."""
    d = a.m
    if m % d:
        raise NotDivisible(f"{d} does not divide {m}")
    step = m // d
    cs = [a.field.zero] * m
    for j, c in enumerate(a.coeffs):
        cs[j * step] = c
    return TruncPoly(a.field, tuple(cs))


def render(a: TruncPoly) -> str:
    terms = []
    for i, c in enumerate(a.coeffs):
        if not c:
            continue
        cs = str(c)
        if i == 0:
            terms.append(cs)
        elif i == 1:
            terms.append(f"{cs}*e")
        else:
            terms.append(f"{cs}*e^{i}")
    return " + ".join(terms) if terms else "0"


def poly_matrix_mul(A: Sequence[Sequence[TruncPoly]], B: Sequence[Sequence[TruncPoly]]) -> list:
    """Product of matrices with :class:`TruncPoly` entries (nonempty inner dim)."""
    n = len(B)
    return [
        [_dot([row[t] for t in range(n)], [B[t][c] for t in range(n)]) for c in range(len(B[0]))]
        for row in A
    ]


def _dot(xs: Sequence[TruncPoly], ys: Sequence[TruncPoly]) -> TruncPoly:
    acc = None
    for x, y in zip(xs, ys):
        p = tp_mul(x, y)
        acc = p if acc is None else acc + p
    return acc
