"""Exception types shared across the package.

All validation failures derive from ``ValueError`` so callers that do not
care about the fine-grained class can catch the usual thing; the CLI maps
them onto its exit-code contract.
"""


class GbrnmfError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(GbrnmfError, ValueError):
    """Matrix dimensions are inconsistent for the requested operation."""


class NonnegativityError(GbrnmfError, ValueError):
    """A matrix contains negative or non-finite entries."""


class ConstraintError(GbrnmfError, ValueError):
    """A constraint specification is invalid (e.g. too many fixed factors)."""


class IndicatorError(ConstraintError):
    """A strict group block is not a one-hot indicator matrix."""


class ConfigError(GbrnmfError, ValueError):
    """A fitting configuration is invalid (rank, iteration budget, ...)."""


class NormalizationError(GbrnmfError, ValueError):
    """A factor cannot be rescaled (zero column sum or zero row area)."""


class NumericError(GbrnmfError, ArithmeticError):
    """The objective became non-finite during iteration (overflow)."""


class MatrixLoadError(GbrnmfError, ValueError):
    """A CSV matrix file failed to parse or violated nonnegativity."""
