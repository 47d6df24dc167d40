"""Operator-spectrum assignment for linear systems with multiplicative noise.

Model-based design (:func:`design`) places the spectrum of the second-moment
operator exactly; :func:`run_learning` reaches the same gain from noisy
closed-loop observations alone.
"""
from .assign import (
    ackermann_gain,
    design,
    lift_gain,
    reduce_general,
    target_spectrum,
    witness_set,
)
from .config import ExperimentConfig, bundled_config, load_config, parse_config, serialize
from .errors import (
    NotControllable,
    ParseError,
    SpecInvalid,
    StochSpecError,
    ValidationError,
)
from .learn import LearnConfig, LearnReport, Schedule, run_learning
from .model import AssignmentSpec, GainPair, PlantParams
from .numerics import char_poly, poly_from_roots
from .plant import ContinuousPlant, DiscretePlant
from .symspace import (
    apply_operator,
    duplication_matrix,
    operator_matrix,
    operator_matrix_general,
    spectrum,
    unvech,
    vech,
)

__version__ = "0.1.0"

__all__ = [
    "ackermann_gain",
    "design",
    "lift_gain",
    "reduce_general",
    "target_spectrum",
    "witness_set",
    "NotControllable",
    "ParseError",
    "SpecInvalid",
    "StochSpecError",
    "ValidationError",
    "apply_operator",
    "duplication_matrix",
    "operator_matrix",
    "operator_matrix_general",
    "spectrum",
    "unvech",
    "vech",
    "ExperimentConfig",
    "bundled_config",
    "load_config",
    "parse_config",
    "serialize",
    "LearnConfig",
    "LearnReport",
    "Schedule",
    "run_learning",
    "AssignmentSpec",
    "GainPair",
    "PlantParams",
    "char_poly",
    "poly_from_roots",
    "ContinuousPlant",
    "DiscretePlant",
]
