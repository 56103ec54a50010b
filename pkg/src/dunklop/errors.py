"""Exception taxonomy shared by all dunklop modules.

Every failure mode that callers are expected to catch gets its own class;
anything else is a plain bug and surfaces as a standard Python exception.
"""

from __future__ import annotations


class DunklopError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(DunklopError, ValueError):
    """Invalid parameter (k < 0, bad quadrature exponents, bad grid size...)."""


class EvaluationError(DunklopError, ValueError):
    """A sampled function returned a non-finite value; carries the node."""

    def __init__(self, msg: str, node=None):
        super().__init__(msg)
        self.node = node


class DomainError(DunklopError, ValueError):
    """Requested evaluation point lies outside the stored grid domain."""


class DomainExceeded(DomainError):
    """Translation argument sqrt(x^2+y^2-2|xy|c) would leave [0, xmax]."""


class RangeError(DunklopError, ValueError):
    """Series evaluation requested outside its guaranteed accuracy window."""


class DivisorOfZero(DunklopError, ZeroDivisionError):
    """Division by an operator-ring element whose indicatrix value vanishes."""


class ResonanceError(DunklopError, ValueError):
    """A characteristic root falls on (or numerically at) an indicatrix zero."""

    def __init__(self, msg: str, root=None, indicatrix_value=None):
        super().__init__(msg)
        self.root = root
        self.indicatrix_value = indicatrix_value


class ResidualError(DunklopError, ArithmeticError):
    """A computed solution failed its defining-equation residual check."""


class NonConvergence(DunklopError, ArithmeticError):
    """An iterative procedure exhausted its budget without converging."""


class ReconstructionError(DunklopError, ArithmeticError):
    """Partial-fraction table fails to rebuild the rational function."""


class IncompleteZeroSet(DunklopError, ArithmeticError):
    """Zero search and argument-principle count disagree inside the disk."""

    def __init__(self, msg: str, zeros=None, winding=None):
        super().__init__(msg)
        self.zeros = zeros
        self.winding = winding


class SingularSystem(DunklopError, ArithmeticError):
    """Boundary-condition collocation system is numerically singular."""


class UnnormalizedFunctional(DunklopError, ValueError):
    """Functional does not satisfy phi{1} = 1."""


class NotMeanPeriodicInput(DunklopError, ValueError):
    """Right-hand side failed the mean-periodicity defect gate."""


class KernelClassError(DunklopError, TypeError):
    """Multiplier kernel outside the supported analytic kernel class."""


class RoundTripError(DunklopError, ArithmeticError):
    """Intertwining inverse failed its forward round-trip identity."""


class ExpressionError(DunklopError, SyntaxError):
    """Expression parse failure; carries byte offset and expected tokens."""

    def __init__(self, msg: str, pos: int, expected=()):
        super().__init__(f"{msg} at offset {pos}" + (f" (expected {', '.join(expected)})" if expected else ""))
        self.pos = pos
        self.expected = tuple(expected)


class ConfigError(DunklopError, ValueError):
    """Problem configuration rejected (unknown field, bad type, bad value)."""


class ToleranceWarning(UserWarning):
    """Quadrature refinement stopped at its budget before reaching tolerance."""
