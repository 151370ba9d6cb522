"""Ordered cones, nonlinear scalarization, cone metric validation and Kannan fixed-point solving."""

from .cone import Cone
from .cone_metric import (
    AxiomReport,
    FiniteConeSpace,
    MonitorReport,
    Witness,
    all_pass,
    example_space_path,
    load_space,
    reduce,
    save_space,
    scalar_convergence_monitor,
    validate_cms,
    validate_rcms,
    validate_scalar_metric,
    validate_scalar_rectangular,
)
from .errors import (
    ConeMetricError,
    DimensionError,
    DivergenceError,
    EstimationError,
    InputError,
    NotContractiveError,
    SolverError,
    SpaceFormatError,
    UnboundedInputError,
)
from .scalarization import ScalarizationContext
from .solver import (
    AffineMap,
    CallableMap,
    FiniteTableMap,
    MapSpec,
    SolveConfig,
    SolveReport,
    banach_solve,
    estimate_beta,
    estimate_contraction,
    kannan_solve,
    write_trace_csv,
)

__version__ = "0.1.0"
