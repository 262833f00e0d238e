"""Exception taxonomy shared across the package.

Data-shaped problems (bad files, bad shapes) and numeric problems (non-finite
values) are distinct classes so the CLI can map them to distinct exit codes.
"""

from __future__ import annotations


class SpecDenoiseError(Exception):
    """Base class for all package errors."""


class InvalidParamError(SpecDenoiseError, ValueError):
    """A parameter is outside its documented domain."""


# --- input data -------------------------------------------------------------

class DataError(SpecDenoiseError):
    """Problems with input files or datasets."""


class EmptyFileError(DataError):
    pass


class MissingColumnError(DataError):
    pass


class MalformedRowError(DataError):
    def __init__(self, message: str, row: int, column: str):
        super().__init__(message)
        self.row = row
        self.column = column


class TooShortError(DataError):
    """Series shorter than one segment."""


class DatasetMissingError(DataError):
    pass


class IoError(DataError):
    pass


# --- shapes and model wiring ------------------------------------------------

class ShapeError(SpecDenoiseError):
    """Base for all shape/bookkeeping violations."""


class BadShapeError(ShapeError):
    pass


class ShapeMismatchError(ShapeError):
    pass


class WindowTooLongError(ShapeError):
    """Analysis window longer than the segment."""


class OddSpatialDimError(ShapeError):
    """2x2 pooling requires even spatial dimensions."""


class ShapeNotDivisibleError(ShapeError):
    """Model input sides must be divisible by the total pooling factor."""


class NoCachedForwardError(SpecDenoiseError):
    """backward() called before forward()."""


# --- numerics ---------------------------------------------------------------

class NumericError(SpecDenoiseError):
    """Non-finite values where finite ones are required."""


class NonFiniteActivationError(NumericError):
    def __init__(self, layer_name: str):
        super().__init__(f"non-finite values in output of layer {layer_name!r}")
        self.layer_name = layer_name


class NonFiniteLossError(NumericError):
    """Training aborted on a non-finite loss; carries the trace so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class TooFewSamplesError(SpecDenoiseError):
    pass


class DegenerateVarianceError(SpecDenoiseError):
    """Moments beyond the mean are undefined for a constant sequence."""


class TooFewPairsError(SpecDenoiseError):
    pass


class EmptyTraceError(SpecDenoiseError):
    pass


class NoRecordsError(SpecDenoiseError):
    pass


class ConfigError(SpecDenoiseError):
    """Unknown or malformed configuration keys/values."""
