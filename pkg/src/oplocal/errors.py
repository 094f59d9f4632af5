"""Exception types shared across the workbench."""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class SizeMismatch(WorkbenchError):
    """Operands act on state spaces (or vectors) of different sizes."""


class IndexOutOfRange(WorkbenchError, IndexError):
    """A state or outcome index falls outside the space."""


class CapExceeded(WorkbenchError):
    """Monoid closure grew past the enumeration cap.

    Carries ``size_so_far`` so callers can decide whether to retry with a
    larger cap or switch to a generator/orbit-based algorithm.
    """

    def __init__(self, size_so_far: int, cap: int):
        self.size_so_far = size_so_far
        self.cap = cap
        super().__init__(f"closure exceeded cap={cap} (reached {size_so_far} elements)")


class NotRefinement(WorkbenchError):
    """factor() was asked to quotient along a non-refinement."""


class NotCommuting(WorkbenchError):
    """A commutation precondition failed; carries the counterexample."""

    def __init__(self, witness=None, message: str = "generator monoids do not commute"):
        self.witness = witness
        super().__init__(message if witness is None else f"{message}: {witness}")


class PreconditionFailed(WorkbenchError):
    """A stated operation precondition does not hold for the inputs."""


class InvariantViolation(WorkbenchError):
    """A property guaranteed by the theory failed; indicates a bug (or a finding)."""


class LayoutError(WorkbenchError):
    """A channel does not have the expected 2-bit box layout."""


class DegenerateMatrix(WorkbenchError):
    """Distance matrix carries no usable geometry (all zeros)."""


class SpecError(WorkbenchError):
    """A theory definition file failed to parse or validate."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")
