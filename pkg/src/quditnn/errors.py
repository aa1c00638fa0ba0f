"""Exception types shared across the package."""


class QuditError(Exception):
    """Base for every error this package raises deliberately."""


class StructuralError(QuditError, ValueError):
    """Inputs are structurally invalid: wrong shapes, bad ranges, broken schemas."""


class PreconditionError(QuditError, ValueError):
    """A numerical precondition (hermiticity, unitarity, normalization) is violated."""


class NumericalError(QuditError, RuntimeError):
    """A numerical routine failed to converge or produced non-finite values."""


class DegenerateReadoutError(NumericalError):
    """Readout cannot renormalize because the relevant probability mass vanished."""


class SchemaError(StructuralError):
    """A dataset file does not match the expected column schema."""


class ParseError(StructuralError):
    """A dataset or config file contains an unparseable cell or line."""
