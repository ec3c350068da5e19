"""Exception classes shared across the package.

Each class corresponds to one error category surfaced by the public API,
so callers (and the CLI exit-code mapping) can discriminate failure modes
without string matching.
"""


class MeyerDeconvError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MeyerDeconvError, ValueError):
    """Invalid grid, basis, or estimator configuration."""


class NormalizationError(MeyerDeconvError, ValueError):
    """A density input does not integrate to one within tolerance."""


class IllPosednessError(MeyerDeconvError, ValueError):
    """The error characteristic function is (numerically) zero on the
    working spectral band, so deconvolution at this level is undefined."""

    def __init__(self, message: str, t: float, value: float):
        super().__init__(message)
        self.t = t
        self.value = value


class CapabilityError(MeyerDeconvError, ValueError):
    """A model lacks an optional capability (e.g. a custom model without
    a sampler cannot generate noise draws)."""


class TabulationRangeError(MeyerDeconvError, ValueError):
    """Evaluation requested outside a tabulated range that cannot be
    silently truncated."""


class ConstraintError(MeyerDeconvError, ValueError):
    """A resolution-rule parameter constraint is violated."""


class InsufficiencyError(MeyerDeconvError, ValueError):
    """Not enough data points for the requested fit."""


class ParseError(MeyerDeconvError, ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
