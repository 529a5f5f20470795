"""Group and basis restricted nonnegative matrix factorization.

Factorizes a nonnegative data matrix as ``x ~ w @ a @ s`` where chosen
leading columns of ``w`` (group indicators) and chosen rows of ``s``
(known bases) stay frozen while everything else is learned by masked
multiplicative updates. Ships with an unconstrained two-factor baseline,
a synthetic benchmark generator, a numerical verification suite and a
CLI (``python -m gbrnmf`` or the ``gbrnmf`` script).
"""

import os as _os


def _apply_thread_cap() -> None:
    # GBRNMF_THREADS caps BLAS parallelism; it only takes effect when set
    # before numpy is first imported, so this runs at package import time.
    cap = _os.environ.get("GBRNMF_THREADS")
    if not cap:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "BLIS_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(var, cap)


_apply_thread_cap()

from .baseline import BaselineModel, init_baseline, nmf_fit, nmf_update_step
from .errors import (
    ConfigError,
    ConstraintError,
    GbrnmfError,
    IndicatorError,
    MatrixLoadError,
    NonnegativityError,
    NormalizationError,
    NumericError,
    ShapeError,
)
from .gbr import (
    ConstraintSpec,
    FitConfig,
    FitReport,
    Model,
    Termination,
    fit,
    init_model,
    kkt_residuals,
    normalize,
    row_areas,
    update_a,
    update_s,
    update_w,
)
from .io import load_labels, load_matrix, save_labels, save_matrix
from .matrix import (
    Gradient,
    as_nonneg_matrix,
    frobenius_objective,
    gradient,
    reconstruct,
)
from .simulate import (
    MODE_CONSTRAINED_ALIGNED,
    MODE_FREE_MATCHED,
    RecoveryReport,
    SimParams,
    SimTruth,
    baseline_as_model,
    evaluate_recovery,
    group_indicator,
    rss,
    simulate,
    truth_constraints,
)
from .verify import (
    AuxCheckReport,
    AuxCheckSample,
    DescentCheckReport,
    GradientCheckReport,
    check_auxiliary,
    check_descent,
    check_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "AuxCheckReport",
    "AuxCheckSample",
    "BaselineModel",
    "ConfigError",
    "ConstraintError",
    "ConstraintSpec",
    "DescentCheckReport",
    "FitConfig",
    "FitReport",
    "GbrnmfError",
    "Gradient",
    "GradientCheckReport",
    "IndicatorError",
    "MatrixLoadError",
    "MODE_CONSTRAINED_ALIGNED",
    "MODE_FREE_MATCHED",
    "Model",
    "NonnegativityError",
    "NormalizationError",
    "NumericError",
    "RecoveryReport",
    "ShapeError",
    "SimParams",
    "SimTruth",
    "Termination",
    "as_nonneg_matrix",
    "baseline_as_model",
    "check_auxiliary",
    "check_descent",
    "check_gradient",
    "evaluate_recovery",
    "fit",
    "frobenius_objective",
    "gradient",
    "group_indicator",
    "init_baseline",
    "init_model",
    "kkt_residuals",
    "load_labels",
    "load_matrix",
    "nmf_fit",
    "nmf_update_step",
    "normalize",
    "reconstruct",
    "row_areas",
    "rss",
    "save_labels",
    "save_matrix",
    "simulate",
    "truth_constraints",
    "update_a",
    "update_s",
    "update_w",
]
