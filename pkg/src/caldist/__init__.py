"""Distance from calibration: exact solvers, approximation schemes, reductions and sampling."""

from .core import (
    Element,
    Instance,
    Partition,
    Predictor,
    SolverKind,
    SolverResult,
    cost_of_partition,
    cost_of_subset,
    induced_predictor,
    is_calibrated,
    l1_distance,
    mu_of_subset,
    tv_distance,
)
from .errors import CaldistError, FeasibilityError, ValidationError
from .oracle import oracle_caldist
from .ptas import ptas_caldist
from .sparsify import discretize, pipeline_caldist, type_sparsify_general, type_sparsify_uniform
from .typesparse import typesparse_caldist

__version__ = "0.1.0"
