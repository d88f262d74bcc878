"""Exact ground fields: the rationals and prime fields.

Field elements are plain Python values normalised by their field:
``int`` residues in ``[0, p)`` for F_p and reduced ``Fraction`` for Q.
The :class:`Field` object is the tag carried alongside them.
"""

from __future__ import annotations

import functools
import random as _random
from fractions import Fraction
from typing import Iterator, Union

from .errors import NonUnit, ParseError

Elem = Union[int, Fraction]


class Field:
    """Interface shared by :class:`PrimeField` and :class:`RationalField`."""

    zero: Elem
    one: Elem
    is_finite: bool = False
    characteristic: int = 0

    def __call__(self, value) -> Elem:
        raise NotImplementedError

    def red(self, value) -> Elem:
        raise NotImplementedError

    def inv(self, a: Elem) -> Elem:
        raise NotImplementedError

    def div(self, a: Elem, b: Elem) -> Elem:
        return self.red(a * self.inv(b))

    def neg(self, a: Elem) -> Elem:
        return self.red(-a)

    def pow(self, a: Elem, e: int) -> Elem:
        if e < 0:
            return self.pow(self.inv(a), -e)
        return self.red(a**e)

    def parse(self, token) -> Elem:
        raise NotImplementedError

    def render(self, a: Elem):
        raise NotImplementedError

    def random(self, rng: _random.Random) -> Elem:
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError


class PrimeField(Field):
    is_finite = True

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.order = p
        self.zero = 0
        self.one = 1

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("GF", self.p))

    def __call__(self, value) -> int:
        if isinstance(value, Fraction):
            return self.div(value.numerator % self.p, value.denominator % self.p)
        return int(value) % self.p

    def red(self, value) -> int:
        return value % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise NonUnit("division by zero in " + repr(self))
        return pow(a, -1, self.p)

    def elements(self) -> range:
        return range(self.p)

    def parse(self, token) -> int:
        if isinstance(token, bool):
            raise ParseError(f"not a field element: {token!r}")
        if isinstance(token, int):
            return token % self.p
        if isinstance(token, str):
            try:
                return self(Fraction(token))
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"not a field element: {token!r}") from exc
        raise ParseError(f"not a field element: {token!r}")

    def render(self, a: int) -> int:
        return int(a)

    def random(self, rng: _random.Random) -> int:
        return rng.randrange(self.p)

    @property
    def spec(self) -> str:
        return f"Fp:{self.p}"


class RationalField(Field):
    is_finite = False

    def __init__(self):
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def __repr__(self) -> str:
        return "QQ"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("QQ")

    def __call__(self, value) -> Fraction:
        return Fraction(value)

    def red(self, value) -> Fraction:
        return value

    def inv(self, a: Fraction) -> Fraction:
        if a == 0:
            raise NonUnit("division by zero in QQ")
        return 1 / Fraction(a)

    def elements(self) -> Iterator[Fraction]:
        raise TypeError("the rationals cannot be enumerated")

    def parse(self, token) -> Fraction:
        if isinstance(token, bool):
            raise ParseError(f"not a rational: {token!r}")
        if isinstance(token, (int, str)):
            try:
                return Fraction(token)
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"not a rational: {token!r}") from exc
        raise ParseError(f"not a rational: {token!r}")

    def render(self, a: Fraction) -> str:
        a = Fraction(a)
        return f"{a.numerator}/{a.denominator}"

    def random(self, rng: _random.Random, bound: int = 5) -> Fraction:
        return Fraction(rng.randint(-bound, bound), rng.randint(1, 3))

    @property
    def spec(self) -> str:
        return "Q"


QQ = RationalField()


@functools.lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def parse_field(spec: str) -> Field:
    """Parse ``"Q"`` or ``"Fp:<p>"``."""
    spec = spec.strip()
    if spec in ("Q", "QQ"):
        return QQ
    if spec.startswith("Fp:"):
        try:
            return GF(int(spec[3:]))
        except ValueError as exc:
            raise ParseError(f"bad field spec {spec!r}: {exc}") from exc
    raise ParseError(f"bad field spec {spec!r}; expected 'Q' or 'Fp:<p>'")
