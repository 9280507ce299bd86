"""Fourier-analytic 3-AP density toolkit over F_p^n.

Library layout:

- space: mixed-radix indexing of F_p^n, subspaces, cosets
- fourier: transform, coset averaging, spectral gaps
- oracle: slow definitional implementations used only for validation
- apstats: per-difference density scans and 3-AP counting statistics
- regularity: weak-regularity certificates and the counting lemma
- increment: mean-cube-density increment engine, upper-bound planner
- construction: interval-gadget lower-bound pipeline, rounding, lower planner
- formats / cli: file formats and the ``apdiff`` command
"""

from .apstats import APReport, lambda3, lambda3_spectral, rho_all, rho_scan
from .construction import (ConstructionParams, IntervalGadget, LevelState,
                           TowerPlan, build_pipeline, extend_level,
                           interval_gadget, level1, plan_lower_schedule,
                           round_to_set, sample_directions, stability_check,
                           verify_five_properties)
from .errors import (ApdiffError, BudgetExceeded, BudgetExhausted,
                     CertificationFailed, NonRealResult, PreconditionFailed,
                     RetriesExhausted)
from .fourier import GFunction, Spectrum, average_over, constant, dft, idft, indicator
from .increment import (IncrementTrace, TowerValue, UpperPlan, increment_step,
                        mean_cube_density, plan_upper_bound, run_increment)
from .regularity import (RegularityCertificate, large_spectrum,
                         verify_counting, weak_regular_subspace)
from .space import Space, Subspace, cosets, full_space, subspace_from_constraints

__version__ = "0.1.0"

__all__ = [
    "APReport", "ApdiffError", "BudgetExceeded", "BudgetExhausted",
    "CertificationFailed", "ConstructionParams", "GFunction",
    "IncrementTrace", "IntervalGadget", "LevelState", "NonRealResult",
    "PreconditionFailed", "RegularityCertificate", "RetriesExhausted",
    "Space", "Spectrum", "Subspace", "TowerPlan", "TowerValue", "UpperPlan",
    "average_over", "build_pipeline", "constant", "cosets", "dft",
    "extend_level", "full_space", "idft", "increment_step", "indicator",
    "interval_gadget", "lambda3", "lambda3_spectral", "large_spectrum",
    "level1", "mean_cube_density", "plan_lower_schedule", "plan_upper_bound",
    "rho_all", "rho_scan", "round_to_set", "run_increment",
    "sample_directions", "stability_check", "subspace_from_constraints",
    "verify_counting", "verify_five_properties", "weak_regular_subspace",
]
