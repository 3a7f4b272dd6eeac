"""Nonconvex low-rank representation by ADMM, with optional dual momentum.

Solves ``min sum_i g(sigma_i(L)) + lam * ||E||  s.t.  D = A Z + E, Z = L``
where the error norm is elementwise L1 (``"l1"``) or column-wise L2,1
(``"l21"``).  Block order per iteration: L, Z, E, alpha, multipliers, mu.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .admm import DivergenceError, MomentumState, SolverConfig, SolveTrace, advance_alpha, momentum_coefficient
from .core import NumericalError, as_matrix
from .diagnostics import c_k
from .prox import gsvt_factors, prox_l1, prox_l21
from .regularizers import penalty

GAMMA_MODES = ("l1", "l21")


@dataclass
class LrrProblem:
    D: np.ndarray
    A: np.ndarray = None
    gamma: str = "l21"
    config: SolverConfig = field(default_factory=lambda: SolverConfig(max_iter=100))

    def __post_init__(self):
        self.D = as_matrix(self.D, "D")
        self.A = self.D if self.A is None else as_matrix(self.A, "A")
        if self.A.shape[0] != self.D.shape[0]:
            raise ValueError("dictionary and data must have the same number of rows")
        if self.gamma not in GAMMA_MODES:
            raise ValueError(f"gamma must be one of {GAMMA_MODES}")


@dataclass
class LrrResult:
    L: np.ndarray
    Z: np.ndarray
    E: np.ndarray
    iterations: int
    converged: bool
    trace: SolveTrace
    Y1: np.ndarray
    Y2: np.ndarray
    Y1_hat: np.ndarray
    Y2_hat: np.ndarray
    mu: float


class ZSolver:
    """Solves ``(I + A^T A) Z = rhs`` with a Cholesky factor computed once."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=np.float64)
        n = self.A.shape[1]
        G = np.eye(n) + self.A.T @ self.A
        try:
            self._factor = cho_factor(G, lower=True)
        except (LinAlgError, ValueError) as exc:
            raise NumericalError(f"Cholesky of I + A^T A failed: {exc}") from exc

    def rhs(self, D, E, L, Yhat1, Yhat2, mu):
        return self.A.T @ (D - E) + L + (self.A.T @ Yhat1 - Yhat2) / mu

    def __call__(self, D, E, L, Yhat1, Yhat2, mu):
        return cho_solve(self._factor, self.rhs(D, E, L, Yhat1, Yhat2, mu))


def solve_z(A, D, E, L, Yhat1, Yhat2, mu):
    """One-off Z-subproblem solve; the solver itself reuses a :class:`ZSolver`."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return ZSolver(A)(D, E, L, Yhat1, Yhat2, mu)


def lrr(problem):
    """Run the (momentum) ADMM on an :class:`LrrProblem`."""
    cfg = problem.config
    D, A = problem.D, problem.A
    n_atoms, n_samples = A.shape[1], D.shape[1]
    prox_e = prox_l1 if problem.gamma == "l1" else prox_l21
    zsolve = ZSolver(A)

    L = np.zeros((n_atoms, n_samples))
    Z = np.zeros_like(L)
    E = np.zeros_like(D)
    dual1 = MomentumState.zeros(D.shape)
    dual2 = MomentumState.zeros(L.shape)
    alpha_hist = [1.0, 1.0]
    mu = cfg.mu0
    guard = cfg.divergence_factor * np.linalg.norm(D)
    trace = SolveTrace()
    converged = False
    k = 0
    while k < cfg.max_iter:
        L_new, s = gsvt_factors(Z + dual2.Y_hat / mu, 1.0 / mu, cfg.spec, cfg.rank_cap)
        Z_new = zsolve(D, E, L_new, dual1.Y_hat, dual2.Y_hat, mu)
        AZ = A @ Z_new
        E_new = prox_e(D - AZ + dual1.Y_hat / mu, cfg.lam / mu)
        alpha = alpha_hist[-1]
        alpha_next = advance_alpha(alpha, cfg.alpha_rule)
        coef = momentum_coefficient(alpha, alpha_next)
        R1 = D - AZ - E_new
        R2 = Z_new - L_new
        yh1, yh2 = dual1.Y_hat, dual2.Y_hat
        older1, older2 = dual1.Y_prev, dual2.Y_prev
        dual1.ascend(mu, R1, coef, cfg.momentum)
        dual2.ascend(mu, R2, coef, cfg.momentum)

        r1, r2 = float(np.sum(R1 * R1)), float(np.sum(R2 * R2))
        if problem.gamma == "l1":
            enorm = float(np.abs(E_new).sum())
        else:
            enorm = float(np.linalg.norm(E_new, axis=0).sum())
        trace.residual.append(np.sqrt(r1))
        trace.residual2.append(np.sqrt(r2))
        trace.y_norm.append(float(np.linalg.norm(dual1.Y)))
        trace.yhat_norm.append(float(np.linalg.norm(dual1.Y_hat)))
        trace.y2_norm.append(float(np.linalg.norm(dual2.Y)))
        trace.yhat2_norm.append(float(np.linalg.norm(dual2.Y_hat)))
        trace.dL.append(float(np.sum((L_new - L) ** 2)))
        trace.dZ.append(float(np.sum((Z_new - Z) ** 2)))
        trace.dE.append(float(np.sum((E_new - E) ** 2)))
        trace.L_norm.append(float(np.linalg.norm(L_new)))
        trace.Z_norm.append(float(np.linalg.norm(Z_new)))
        trace.E_norm.append(float(np.linalg.norm(E_new)))
        trace.lagrangian.append(
            penalty(cfg.spec, s) + cfg.lam * enorm + float(np.sum(yh1 * R1)) + float(np.sum(yh2 * R2))
            + 0.5 * mu * (r1 + r2)
        )
        trace.mu.append(mu)
        trace.alpha.append(alpha_next)
        trace.coef.append(coef)
        if k >= 1:
            a = (alpha_hist[-1], alpha_hist[-2], alpha_next) if cfg.momentum else (1.0, 1.0, 1.0)
            mus = (mu * cfg.kappa, mu)
            trace.c_k.append(
                c_k(dual1.Y, dual1.Y_prev, older1, *a, *mus) + c_k(dual2.Y, dual2.Y_prev, older2, *a, *mus)
            )
        else:
            trace.c_k.append(float("nan"))

        L, Z, E = L_new, Z_new, E_new
        alpha_hist = [alpha_hist[-1], alpha_next]
        mu = cfg.kappa * mu
        k += 1

        worst = max(trace.L_norm[-1], trace.Z_norm[-1], trace.E_norm[-1], trace.y_norm[-1],
                    trace.yhat_norm[-1], trace.y2_norm[-1], trace.yhat2_norm[-1])
        if not np.isfinite(worst) or worst > guard > 0:
            raise DivergenceError(f"iterate norm {worst:.3e} exceeded guard at iteration {k}", trace)
        if r1 + r2 < cfg.feas_tol:
            converged = True
            break
    return LrrResult(L, Z, E, k, converged, trace, dual1.Y, dual2.Y, dual1.Y_hat, dual2.Y_hat, mu)
