"""Sparse-plus-low-rank matrix recovery with nonconvex rank surrogates."""
from .admm import ALPHA_RULES, DivergenceError, SolverConfig, SolveTrace, advance_alpha, momentum_coefficient
from .clustering import accuracy, affinity, detect_outliers, spectral_cluster, spectral_embedding
from .completion import CompletionProblem, complete
from .core import NumericalError, ObservationMask, SvdFactors, psnr, relative_error, soft_threshold, svd
from .diagnostics import (boundedness_report, c_k, c_k_inner_product, kkt_report, lrr_kkt_report, partial_sums_stable,
                          rate_report)
from .lrr import LrrProblem, LrrResult, lrr, solve_z
from .prox import gsvt, prox_l1, prox_l21, svt
from .regularizers import RegularizerSpec, auto_thresholds, eval_g, penalty, supergradient, weight_vector
from .rpca import RpcaResult, compare_variants, rpca

__all__ = [
    "ALPHA_RULES", "DivergenceError", "SolverConfig", "SolveTrace", "advance_alpha", "momentum_coefficient",
    "accuracy", "affinity", "detect_outliers", "spectral_cluster", "spectral_embedding", "CompletionProblem",
    "complete", "NumericalError", "ObservationMask", "SvdFactors", "psnr", "relative_error", "soft_threshold",
    "svd", "boundedness_report", "c_k", "c_k_inner_product", "kkt_report", "lrr_kkt_report", "partial_sums_stable",
    "rate_report", "LrrProblem", "LrrResult", "lrr", "solve_z", "gsvt", "prox_l1", "prox_l21", "svt",
    "RegularizerSpec", "auto_thresholds", "eval_g", "penalty", "supergradient", "weight_vector", "RpcaResult",
    "compare_variants", "rpca",
]

__version__ = "0.1.0"
