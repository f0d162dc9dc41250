"""Exception types raised across the package."""

from __future__ import annotations


class SetguardError(Exception):
    """Base class for all package errors."""


class OutOfSet(SetguardError, ValueError):
    """An output value lies outside (or on the edge of) the prescribed interval."""


class JacobianUnderflow(SetguardError, ArithmeticError):
    """A transform derivative fell below the division floor; epsilon has diverged."""


class DegenerateTransfer(SetguardError, ValueError):
    """The plant's input-to-output numerator polynomial is identically zero."""


class ZeroDenominator(SetguardError, ZeroDivisionError):
    """A rational function was given a zero denominator polynomial."""


class SingularLB(SetguardError, ValueError):
    """L @ B is not invertible, so the relative-degree-one law is undefined."""


class NonHurwitzFilter(SetguardError, ValueError):
    """The controller filter polynomial has a root with non-negative real part."""


class NonPositiveP(SetguardError, ValueError):
    """A Lyapunov candidate matrix is not positive definite."""


class NonHurwitzNominal(SetguardError, ValueError):
    """The extended system at the nominal vertex is not (alpha-shifted) Hurwitz."""


class NonFiniteState(SetguardError, FloatingPointError):
    """An integration step produced NaN or infinity."""


class ConfigError(SetguardError, ValueError):
    """Invalid run configuration.

    ``field`` is the dotted path of the offending key when known and ``line``
    the 1-based line number in the source text when it can be located.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = (", ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)
