"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`RkhsError`,
so callers can catch the whole family at once.  Errors that carry a numerical
certificate expose it as an attribute rather than only inside the message.
"""

from __future__ import annotations

__all__ = [
    "RkhsError",
    "DomainError",
    "ShapeError",
    "ContractViolation",
    "PreconditionError",
    "DivisionByZeroError",
    "NormalizationError",
    "NotCNPError",
    "MembershipError",
    "RangeError",
    "EmptySubspaceError",
    "InvarianceViolationError",
    "ZeroSubspaceError",
    "VerificationError",
    "MismatchError",
    "NoFactorizationError",
    "InternalConsistencyError",
    "NumericalError",
    "StageError",
    "ThreeKernelError",
    "ConfigError",]


class RkhsError(Exception):
    """Base class for all library errors."""


class DomainError(RkhsError, ValueError):
    """A sample point lies outside the domain of a kernel."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class ShapeError(RkhsError, ValueError):
    """Array shapes or sample sets do not conform."""


class ContractViolation(RkhsError, ValueError):
    """An input breaks a documented precondition (e.g. non-Hermitian matrix)."""


class PreconditionError(ContractViolation):
    """A checked precondition such as normalization does not hold."""


class DivisionByZeroError(RkhsError, ZeroDivisionError):
    """A divisor entry vanishes."""

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class NormalizationError(RkhsError, ValueError):
    """A kernel cannot be normalized at the requested base point."""


class NotCNPError(RkhsError, ValueError):
    """The matrix ``[1 - 1/s]`` has a negative eigenvalue."""

    def __init__(self, message: str, certificate: float):
        super().__init__(message)
        self.certificate = certificate


class MembershipError(RkhsError, ValueError):
    """A vector of values is not in the sampled space."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class RangeError(MembershipError):
    """A multiplier maps the source space outside the target space."""


class EmptySubspaceError(RkhsError, ValueError):
    """A subspace construction produced the zero subspace."""


class InvarianceViolationError(RkhsError, ValueError):
    """The quotient ``k^M / s`` is not positive semi-definite."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class ZeroSubspaceError(EmptySubspaceError):
    """The quotient kernel is numerically zero."""


class VerificationError(RkhsError):
    """One or more representation checks failed."""

    def __init__(self, message: str, failures: list[str], diagnostics=None):
        super().__init__(message)
        self.failures = failures
        self.diagnostics = diagnostics


class MismatchError(RkhsError, ValueError):
    """Two symbols do not share the same quotient kernel."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NoFactorizationError(RkhsError, ValueError):
    """The Leech defect kernel is not positive semi-definite."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InternalConsistencyError(RkhsError, ArithmeticError):
    """An identity that must hold algebraically failed numerically."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NumericalError(RkhsError, ArithmeticError):
    """A numerical step broke down (singular system, out-of-range value)."""


class StageError(RkhsError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class ThreeKernelError(RkhsError, ValueError):
    """Raised when the nested-subspace pipeline is asked to use a third kernel."""


class ConfigError(RkhsError, ValueError):
    """A scenario file could not be parsed or validated."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line
