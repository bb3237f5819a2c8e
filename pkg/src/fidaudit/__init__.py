"""Feature importance disparity auditing over rich subgroups."""

from .dataset import (
    ColumnSchema,
    Dataset,
    SplitPair,
    default_split_fraction,
    load_dataset,
    load_schema,
    split,
)
from .errors import AuditError
from .fairness import FairnessReport, fairness_deltas
from .importance import (
    ImportanceMatrix,
    ImportanceStats,
    grad_saliency,
    importance_stats,
    load_importance,
    write_importance,
)
from .linfid import (
    LinFidConfig,
    lin_fid,
    linfid_audit,
    linfid_gradient_check,
    optimize_linfid,
    size_penalty,
)
from .models import (
    LinearCoefficients,
    LogisticModel,
    fit_logistic,
    fit_wls,
    predict_proba,
)
from .csc import CostPair, csc_best_response
from .separable import (
    DEFAULT_ALPHA_RANGES,
    AuditResult,
    BruteForceResult,
    SearchConfig,
    avg_fid_sweep,
    brute_force_max_fid,
    constrained_search,
    default_hyperparameters,
    dual_weights,
    evaluate_group,
    lagrangian,
    marginal_baseline,
    theoretical_eta,
)
from .subgroup import (
    GroupDistribution,
    SoftGroup,
    ThresholdGroup,
    fid_value,
    group_from_json_dict,
    group_size,
    membership,
)

__version__ = "0.1.0"
