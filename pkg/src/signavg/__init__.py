"""Sign averaging for comparison-based optimisation under alpha-stable noise."""

__version__ = "0.1.0"

from .stable import (  # noqa: E402
    StableParams,
    cdf_symmetric_standard,
    linear_transform,
    sample,
    sum_many,
    sum_params,
)
from .problems import (  # noqa: E402
    NoisyProblem,
    custom_problem,
    evaluate,
    evaluate_many,
    ground_truth,
    make_additive_ellipsoid,
    make_linear_noise_ellipsoid,
    make_multiplicative_ellipsoid,
    make_problem,
)
from .comparators import (  # noqa: E402
    ComparatorKind,
    Method,
    compare_average,
    compare_median,
    compare_sign_average,
    estimate_oep,
)
from .theory import (  # noqa: E402
    derive_pair_params,
    hoeffding_lower_bound,
    oep_average_analytic,
    sufficient_k,
)
from .ranking import WeightScheme, pairwise_sign_matrix, scores, tie_aware_weights  # noqa: E402
from .metrics import kendall_tau_b, moving_average  # noqa: E402
from .cmaes import Handler, run  # noqa: E402

__all__ = [
    "StableParams",
    "cdf_symmetric_standard",
    "linear_transform",
    "sample",
    "sum_many",
    "sum_params",
    "NoisyProblem",
    "custom_problem",
    "evaluate",
    "evaluate_many",
    "ground_truth",
    "make_additive_ellipsoid",
    "make_linear_noise_ellipsoid",
    "make_multiplicative_ellipsoid",
    "make_problem",
    "ComparatorKind",
    "Method",
    "compare_average",
    "compare_median",
    "compare_sign_average",
    "estimate_oep",
    "derive_pair_params",
    "hoeffding_lower_bound",
    "oep_average_analytic",
    "sufficient_k",
    "WeightScheme",
    "pairwise_sign_matrix",
    "scores",
    "tie_aware_weights",
    "kendall_tau_b",
    "moving_average",
    "Handler",
    "run",
]
