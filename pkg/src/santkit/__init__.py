"""Stochastic activity network templates.

Define parametric activity-network models whose structure and behavior
depend on typed parameters, derive concrete nets from parameter
assignments, validate them, simulate them by discrete-event execution,
and export them for inspection.
"""

from .concretize import (PlaceIndexMap, build_index_map, concretize,
                         concretize_input_gate, concretize_output_gate,
                         expand_place, lift_marking, project_marking)
from .errors import Diagnostic, SantError, ValidationError
from .fixtures import (build_geo_template, build_tmi_template,
                       build_user_template)
from .sancore import (ConcreteSan, Marking, find_instability, fire,
                      is_enabled, is_stable, reachable_markings, validate_san)
from .sim import RewardSpec, SimConfig, SimResult, simulate
from .template import SanTemplate, validate_template
from .terms import Sort, Term, eval_term, infer_sort, parse_term, print_term

__version__ = "0.1.0"

__all__ = [
    "ConcreteSan", "Diagnostic", "Marking", "PlaceIndexMap", "RewardSpec",
    "SanTemplate", "SantError", "SimConfig", "SimResult", "Sort", "Term",
    "ValidationError", "build_geo_template", "build_index_map",
    "build_tmi_template", "build_user_template", "concretize",
    "concretize_input_gate", "concretize_output_gate", "eval_term",
    "expand_place", "find_instability", "fire", "infer_sort", "is_enabled",
    "is_stable", "lift_marking", "parse_term", "print_term",
    "project_marking", "reachable_markings", "simulate", "validate_san",
    "validate_template",
]
