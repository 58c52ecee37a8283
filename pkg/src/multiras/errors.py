"""Exception types raised across the library.

File-level errors carry ``path`` and, where it makes sense, a 1-based
``line`` so batch pipelines can point at the offending record.
"""

from __future__ import annotations


class MultirasError(Exception):
    """Base class for all library-specific errors."""


class DimensionError(MultirasError, IndexError):
    """A dimension index or dimension specification is invalid."""


class ShapeMismatchError(MultirasError, ValueError):
    """Operand shapes do not line up."""


class NegativeValueError(MultirasError, ValueError):
    """A negative value where only nonnegative entries are allowed."""

    def __init__(self, message, path=None, line=None):
        super().__init__(_with_location(message, path, line))
        self.path = path
        self.line = line


class IncompatibleMarginsError(MultirasError):
    """Margin targets fail the pairwise consistency condition.

    ``violations`` holds the detected mismatches (possibly truncated for
    the message, never for the attribute).
    """

    def __init__(self, violations, tolerance):
        self.violations = list(violations)
        self.tolerance = tolerance
        shown = ", ".join(str(v) for v in self.violations[:3])
        more = "" if len(self.violations) <= 3 else f" (+{len(self.violations) - 3} more)"
        super().__init__(
            f"{len(self.violations)} margin compatibility violation(s) "
            f"at tolerance {tolerance:g}: {shown}{more}"
        )


class ZeroFiberPositiveMarginError(MultirasError):
    """A fiber sums to zero while its target margin is positive.

    No multiplicative rescaling can move mass into an all-zero fiber, so
    the instance is infeasible for this zero structure.
    """

    def __init__(self, dim, margin_index, target):
        self.dim = dim
        self.margin_index = tuple(margin_index)
        self.target = target
        super().__init__(
            f"fiber along dimension {dim} at margin index {self.margin_index} "
            f"sums to 0 but its target margin is {target:g}"
        )


class NonPositiveCellError(MultirasError, ValueError):
    """A sampled cell is zero where a strictly positive value is required."""


class SingularMatrixError(MultirasError):
    """(I - A) is singular or numerically too ill-conditioned to invert."""


class ZeroDenominatorError(MultirasError):
    """An industry has zero total output but nonzero flows into it."""


class IdentityViolationError(MultirasError):
    """An accounting identity of the square table fails beyond tolerance."""

    def __init__(self, identity, index, lhs, rhs):
        self.identity = identity
        self.index = index
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(
            f"identity {identity!r} violated at index {index}: {lhs!r} != {rhs!r}"
        )


class TensorFileError(MultirasError):
    """Base class for tensor/margin/table file problems."""

    def __init__(self, message, path=None, line=None):
        super().__init__(_with_location(message, path, line))
        self.path = path
        self.line = line


class ParseError(TensorFileError):
    """A file does not follow the documented schema."""


class MissingCellError(TensorFileError):
    """The Cartesian product of observed labels is not fully enumerated."""


class DuplicateCellError(TensorFileError):
    """The same cell appears more than once."""


def _with_location(message, path, line):
    if path is not None and line is not None:
        return f"{path}:{line}: {message}"
    if path is not None:
        return f"{path}: {message}"
    return message
