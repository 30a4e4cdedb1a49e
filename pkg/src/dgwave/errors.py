"""Exception hierarchy for the solver."""


class DGWaveError(Exception):
    """Base class for solver errors."""


class SingularMatrix(DGWaveError):
    pass


class NotSPD(DGWaveError):
    pass


class InvalidDegree(DGWaveError, ValueError):
    pass


class TooFewElements(DGWaveError, ValueError):
    pass


class DegreeTooLow(DGWaveError, ValueError):
    pass


class SpaceMismatch(DGWaveError, ValueError):
    pass


class DimensionMismatch(DGWaveError, ValueError):
    pass


class IndexOutOfRange(DGWaveError, IndexError):
    pass


class TooManyFactors(DGWaveError, ValueError):
    pass


class OutOfDomain(DGWaveError, ValueError):
    pass


class OutOfRange(DGWaveError, ValueError):
    pass


class MissingExactSolution(DGWaveError, ValueError):
    pass
