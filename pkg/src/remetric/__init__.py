"""Remetrization toolkit for function families on finite carriers.

Builds the compatible sup-metric under which every n-fold composition of a
family satisfies a prescribed Lipschitz bound (for instance log(n + 2)),
and verifies each construction by exact finite computation.
"""

from .errors import HorizonExhausted, RemetricError, TableBudgetExceeded
from .family import (ClosureLevels, FunctionFamily, chained_delta_probe,
                     close_levels, equicontinuity_profile, word_length)
from .metricspace import (FiniteMetricSpace, admits_modulus, bound_metric,
                          lipschitz_estimate, read_matrix_csv, validate_metric,
                          write_matrix_csv)
from .moduli import (Modulus, ModulusSequence, build_simple_minorants,
                     cap_modulus, check_liminf_floor, check_modulus_conditions)
from .remetrize import (Remetrization, build_remetrization, equivalence_probe,
                        iterate_bound_report, naive_sup_metric,
                        tent_distance_shrink_check, tent_expansion_witness,
                        verify_level_bounds)
from .sequences import (Envelope, GrowthSequence, build_envelope,
                        verify_submultiplicative)
from .systems import (DyadicGrid, counterexample, make_group_system,
                      make_rotation_system, make_tent_system, tent_value)

__all__ = [
    "RemetricError", "HorizonExhausted", "TableBudgetExceeded",
    "Modulus", "ModulusSequence", "check_modulus_conditions", "cap_modulus",
    "check_liminf_floor", "build_simple_minorants",
    "GrowthSequence", "Envelope", "build_envelope", "verify_submultiplicative",
    "FiniteMetricSpace", "validate_metric", "bound_metric", "admits_modulus",
    "lipschitz_estimate", "write_matrix_csv", "read_matrix_csv",
    "FunctionFamily", "ClosureLevels", "close_levels", "word_length",
    "equicontinuity_profile", "chained_delta_probe",
    "Remetrization", "build_remetrization", "naive_sup_metric",
    "verify_level_bounds", "iterate_bound_report", "equivalence_probe",
    "tent_expansion_witness", "tent_distance_shrink_check",
    "DyadicGrid", "tent_value", "make_tent_system", "make_rotation_system",
    "make_group_system", "counterexample",
]

__version__ = "0.1.0"
