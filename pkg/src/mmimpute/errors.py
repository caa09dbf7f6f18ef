"""Exception taxonomy for the package.

The CLI maps these onto exit codes: UsageError subclasses exit with 1,
DataError subclasses with 2, NumericalError subclasses with 3.
"""


class MmImputeError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(MmImputeError):
    """Invalid parameter values or an unusable configuration."""


class InvalidParameter(UsageError):
    pass


class GraphTooLarge(UsageError):
    """Graph exceeds the size cap of the dense diffusion solve."""


class DataError(MmImputeError):
    """Malformed or mutually inconsistent input data."""


class EmptyDataset(DataError):
    pass


class ParseError(DataError):
    pass


class FormatError(DataError):
    pass


class UnknownItem(DataError):
    pass


class UnknownModality(DataError):
    pass


class InconsistentData(DataError):
    pass


class NoObservedFeatures(DataError):
    """A modality has no observed feature rows to aggregate."""


class NumericalError(MmImputeError):
    """A diffusion operator cannot be evaluated reliably."""


class SingularDiffusion(NumericalError):
    pass


class DivergentDiffusion(NumericalError):
    pass
