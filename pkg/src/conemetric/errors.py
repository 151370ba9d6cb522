"""Exception hierarchy shared by all modules."""


class ConeMetricError(Exception):
    """Base class for every error raised by this package."""


class InputError(ConeMetricError, ValueError):
    """Malformed user input: bad shapes, bad files, bad parameters."""


class DimensionError(InputError):
    pass


class SpaceFormatError(InputError):
    """A finite space table is malformed or violates the loader's checks."""


class UnboundedInputError(InputError):
    """Bisection bracket grew past the configured cap."""


class SolverError(ConeMetricError):
    pass


class EstimationError(SolverError):
    """No admissible pair was available to estimate a contraction constant."""


class NotContractiveError(SolverError):
    pass


class DivergenceError(SolverError):
    """The orbit left the representable range (inf/nan iterates)."""
