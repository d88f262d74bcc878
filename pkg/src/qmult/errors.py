"""Exception hierarchy.

Every failure that is a property of the mathematical input (a non-unit,
an instance that is too large to enumerate, a missing root of unity)
derives from :class:`DomainError`.  The CLI maps those to exit code 2 and
everything else (bad files, malformed JSON) to exit code 1.
"""

from __future__ import annotations


class QmultError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QmultError):
    """The input is well formed but mathematically unsupported."""


class ParseError(QmultError):
    """Malformed textual or JSON input."""


class MismatchedRing(DomainError):
    pass


class NonUnit(DomainError):
    pass


class NotDivisible(DomainError):
    pass


class NotModuleLinear(DomainError):
    pass


class ShapeMismatch(DomainError):
    pass


class ThetaNotOrthogonal(DomainError):
    pass


NotOrthogonal = ThetaNotOrthogonal


class TooLarge(DomainError):
    pass


class Unsupported(DomainError):
    pass


class NotSemistable(DomainError):
    pass


class GammaNotInGl0(DomainError):
    pass


class AlphaNotOnLine(DomainError):
    pass


class InvalidParams(DomainError):
    pass


class NoRoot(DomainError):
    pass


class WrongOrder(DomainError):
    pass


class NotPolynomial(DomainError):
    pass


class InsufficientData(DomainError):
    pass
