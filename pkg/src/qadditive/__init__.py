"""q-additive scaling laws for resource quantifiers.

``E(N) = sum_m eta^m(N) e_m`` with ``e_m`` the quantifier at ``a**(m-1)``
copies.  The package evaluates such laws exactly on the copy lattice,
in closed form for any real ``N``, classifies their large-N behaviour and
fits them to data.
"""
from .analysis import (
    OSD_INPUTS,
    AsymptoteReport,
    FeasibilityReport,
    OsdModelSpec,
    asymptote,
    build_osd_model,
    check_2additive_feasibility,
    check_osd_consistency,
    model_feasibility,
    regularized_curve,
)
from .closed_forms import (
    closed_form_2additive,
    closed_form_3additive,
    degenerate_2additive,
    degenerate_3additive,
)
from .errors import QAdditiveError
from .fibonacci import binet_check, fibonacci_2additive_eval, fibonacci_hybrid
from .fit import FitProblem, FitResult, fit_evector, fit_exponents, hypothesis_residual
from .io import emit_figure_data, load_dataset, load_model, save_model
from .model import (
    CoefficientTable,
    CopyLattice,
    ScalingModel,
    Spectrum,
    build_companion,
    closed_form_eval,
    closure_from_exponents,
    eigen_spectrum,
    oracle_eval,
    recurrence_oracle,
    scalability_consistency_check,
    solve_coefficients,
)

__version__ = "0.1.0"
