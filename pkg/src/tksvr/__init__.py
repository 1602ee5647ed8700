"""Support vector regression with tensor kernels in l^r feature spaces."""

from .contraction import (
    ContractionResult,
    GramTensor,
    contract_full,
    contract_full_naive,
    contract_gradient,
    contract_predict,
    enumerate_multisets,
)
from .dual_solver import (
    DualProblem,
    DualSolution,
    KKTReport,
    SolverConfig,
    dual_gradient_smooth,
    dual_objective,
    kkt_report,
    recover_offset,
    solve,
)
from .estimator import TensorKernelSVR
from .kernels import (
    DomainCheck,
    KernelSpec,
    SeriesSpec,
    bergman_series,
    binomial_series,
    builtin_series_names,
    check_domain,
    eval_kernel,
    eval_normalized,
    exponential_series,
    geometric_series,
    multi_index_dictionary,
    polynomial_series,
    series_by_name,
)
from .losses import (
    EpsInsensitiveLoss,
    PowerRegularizer,
    SquareLoss,
    loss_conjugate,
    loss_conjugate_derivative,
    loss_subdifferential_distance,
    loss_value,
    prox_dual_term,
    regularizer_conjugate,
    regularizer_value,
)
from .model import Dataset, Model, fit, load, predict, predict_many, residuals, save

__version__ = "0.1.0"

__all__ = [
    "ContractionResult", "GramTensor", "contract_full", "contract_full_naive",
    "contract_gradient", "contract_predict", "enumerate_multisets",
    "DualProblem", "DualSolution", "KKTReport", "SolverConfig",
    "dual_gradient_smooth", "dual_objective", "kkt_report", "recover_offset",
    "solve", "TensorKernelSVR", "DomainCheck", "KernelSpec", "SeriesSpec",
    "bergman_series", "binomial_series", "builtin_series_names",
    "check_domain", "eval_kernel", "eval_normalized", "exponential_series",
    "geometric_series", "multi_index_dictionary", "polynomial_series",
    "series_by_name", "EpsInsensitiveLoss", "PowerRegularizer", "SquareLoss",
    "loss_conjugate", "loss_conjugate_derivative",
    "loss_subdifferential_distance", "loss_value", "prox_dual_term",
    "regularizer_conjugate", "regularizer_value", "Dataset", "Model", "fit",
    "load", "predict", "predict_many", "residuals", "save",
]
