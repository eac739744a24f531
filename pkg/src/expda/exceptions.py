"""Exception types shared across the package."""


class ExpdaError(Exception):
    """Base class for all package errors."""


class DimensionError(ExpdaError):
    """Operands have incompatible or invalid shapes."""


class SymmetryError(ExpdaError):
    """A matrix required to be symmetric is not."""


class OracleScaleError(ExpdaError):
    """A dense d x d reference computation was requested above the oracle cap.

    The fast path never forms d x d matrices; this error guards the dense
    reference routines from accidental use at large dimension.
    """


class DatasetError(ExpdaError):
    """A labeled dataset violates its construction invariants."""


class IngestError(ExpdaError):
    """A data file could not be parsed; the message carries diagnostics."""


class SingularScatterError(ExpdaError):
    """The LDA inner matrix is singular (small-sample-size condition)."""


class ConfigError(ExpdaError):
    """An experiment configuration is invalid."""


class ConvergenceError(ExpdaError):
    """The eigensolver did not converge; carries the best pairs found so far.

    Attributes
    ----------
    pairs : list
        Best Ritz pairs at the time of failure, sorted by descending |value|,
        each with its current residual norm.
    """

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)
