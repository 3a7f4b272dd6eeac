"""Proximal-gradient matrix completion with a nonconvex rank surrogate.

Minimizes ``sum_i g(sigma_i(X)) + 0.5 * ||P_Omega(X) - P_Omega(O)||_F^2``.
"""
from dataclasses import dataclass, field

import numpy as np

from .core import NumericalError, ObservationMask, as_matrix, svd
from .prox import gsvt_factors
from .regularizers import RegularizerSpec, penalty


@dataclass
class CompletionProblem:
    mask: ObservationMask
    observed: np.ndarray
    spec: RegularizerSpec = field(default_factory=lambda: RegularizerSpec.piecewise())
    mu: float = 1.1
    max_iter: int = 600
    step_tol: float = 1e-12
    rank_cap: object = None

    def __post_init__(self):
        self.observed = as_matrix(self.observed, "observed")
        if self.observed.shape != self.mask.shape:
            raise ValueError("observed matrix and mask differ in shape")
        if np.any(self.observed[~self.mask.dense] != 0):
            raise ValueError("observed matrix must be zero off the mask")
        if self.mu < 1.0:
            raise ValueError("mu must be >= 1 (gradient Lipschitz constant is 1)")
        if self.step_tol <= 0 or self.max_iter < 1:
            raise ValueError("need step_tol > 0 and max_iter >= 1")


@dataclass
class CompletionTrace:
    objective: list = field(default_factory=list)
    step: list = field(default_factory=list)

    def __len__(self):
        return len(self.step)


def gradient(problem, X):
    """Gradient of the data term: ``P_Omega(X) - P_Omega(O)``."""
    return problem.mask.project(X) - problem.observed


def objective(problem, X, sigma=None):
    if sigma is None:
        sigma = svd(X).sigma
    r = gradient(problem, X)
    return 0.5 * float(np.sum(r * r)) + penalty(problem.spec, sigma)


def complete(problem):
    """Run proximal gradient from ``X0 = P_Omega(O)``.

    Returns:
        (X, trace) where trace records the objective after every step and the
        relative step ``||X_{k+1} - X_k||_F / max(1, ||X_k||_F)``.
    """
    X = problem.observed.copy()
    trace = CompletionTrace()
    trace.objective.append(objective(problem, X))
    tau = 1.0 / problem.mu
    for k in range(problem.max_iter):
        P = X - gradient(problem, X) / problem.mu
        try:
            X_new, s = gsvt_factors(P, tau, problem.spec, problem.rank_cap)
        except NumericalError as exc:
            raise NumericalError(f"iteration {k}: {exc}") from exc
        step = np.linalg.norm(X_new - X) / max(1.0, np.linalg.norm(X))
        X = X_new
        trace.step.append(float(step))
        trace.objective.append(objective(problem, X, s))
        if step < problem.step_tol:
            break
    return X, trace
