"""Exception hierarchy shared by all coneham modules."""

from __future__ import annotations


class ConehamError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(ConehamError):
    """An argument violates a documented precondition."""


class GridShapeError(ConehamError):
    """A grid function does not match the quadrature it is used with."""


class InvalidMeasureError(ConehamError):
    """A Stieltjes measure has a negative density or atom mass."""


class SamplingFailureError(ConehamError):
    """A rejection sampler exhausted its attempt budget."""


class UnsupportedConeError(ConehamError):
    """The cone lacks a registered range bounder or growth map."""


class NonlinearityDomainError(ConehamError):
    """The nonlinearity produced a non-finite value."""


class OracleFailureError(ConehamError):
    """The shooting oracle is unavailable or failed to bracket a slope."""


class ExpressionSyntaxError(ConehamError):
    """Malformed expression text; carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExpressionEvalError(ConehamError):
    """Runtime failure while evaluating an expression (e.g. division by zero)."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ProblemFileError(ConehamError):
    """A problem file is missing a field or references an unknown label."""
