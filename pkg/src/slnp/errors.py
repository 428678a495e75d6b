"""Exception hierarchy.

Errors fall into three families so that front ends can map them to exit
codes: configuration/usage problems, bad input data, and numerical failures.
"""


class SLNPError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SLNPError, ValueError):
    """Invalid hyperparameters or inconsistent options."""


class DataError(SLNPError, ValueError):
    """Input data is malformed or violates a structural invariant."""


class NumericalError(SLNPError, ArithmeticError):
    """A numerical kernel failed or its preconditions do not hold."""


# -- dataset invariants -----------------------------------------------------

class LabelOutOfRange(DataError):
    pass


class EmptyClass(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class PartitionMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class NonFiniteInput(DataError):
    pass


# -- similarity / fitting ---------------------------------------------------

class KTooLarge(ConfigError):
    pass


class GammaZero(NumericalError):
    pass


class NoIterations(ConfigError):
    pass


# -- eigen kernels ----------------------------------------------------------

class NotSymmetric(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class DimensionTooLarge(ConfigError):
    pass


class SingleSample(DataError):
    pass


# -- loaders ----------------------------------------------------------------

class BadMagic(DataError):
    pass


class TruncatedFile(DataError):
    pass


class CountMismatch(DataError):
    pass


class RaggedRow(DataError):
    pass


class NonNumericCell(DataError):
    pass


class MissingColumn(DataError):
    pass


class BadPgmHeader(DataError):
    pass


class GeometryMismatch(DataError):
    pass


class NotEnoughSamples(DataError):
    pass


# -- evaluation -------------------------------------------------------------

class EmptyTrainSet(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class UnknownClass(DataError):
    pass


class NoWatchedSample(ConfigError):
    pass
