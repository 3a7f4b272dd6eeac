"""Nonconvex robust PCA by ADMM, with optional dual momentum.

Solves ``min sum_i g(sigma_i(L)) + lam * ||E||_1  s.t.  D = L + E``.  Each
iteration updates L (generalized SVT), E (soft thresholding), the momentum
weight alpha, the multiplier pair (Y, Y_hat) and finally mu <- kappa * mu.
With momentum off Y_hat is Y and the method is the plain inexact ALM.
"""
from dataclasses import dataclass

import numpy as np

from .admm import DivergenceError, MomentumState, SolverConfig, SolveTrace, advance_alpha, momentum_coefficient
from .core import as_matrix
from .diagnostics import c_k
from .prox import gsvt_factors, prox_l1
from .regularizers import penalty


@dataclass
class RpcaResult:
    L: np.ndarray
    E: np.ndarray
    iterations: int
    converged: bool
    trace: SolveTrace
    Y: np.ndarray
    Y_hat: np.ndarray
    mu: float


def rpca(D, config=None, truth=None):
    """Decompose ``D`` into low-rank ``L`` plus sparse ``E``.

    Args:
        D: data matrix.
        config: :class:`SolverConfig`; defaults to the convex baseline.
        truth: optional planted low-rank matrix; when given, ``||L_k - truth||_F``
            is appended to ``trace.error_curve`` after each iteration.

    Raises:
        DivergenceError: an iterate became non-finite or exceeded
            ``config.divergence_factor * ||D||_F``.  The partial trace is attached.
    """
    cfg = config or SolverConfig()
    D = as_matrix(D, "D")
    shape = D.shape
    L = np.zeros(shape)
    E = np.zeros(shape)
    dual = MomentumState.zeros(shape)
    Y_older = np.zeros(shape)
    alpha_hist = [1.0, 1.0]  # alpha^{k-1}, alpha^k
    mu = cfg.mu0
    guard = cfg.divergence_factor * np.linalg.norm(D)
    trace = SolveTrace()
    converged = False
    k = 0
    while k < cfg.max_iter:
        L_new, s = gsvt_factors(D - E + dual.Y_hat / mu, 1.0 / mu, cfg.spec, cfg.rank_cap)
        E_new = prox_l1(D - L_new + dual.Y_hat / mu, cfg.lam / mu)
        alpha = alpha_hist[-1]
        alpha_next = advance_alpha(alpha, cfg.alpha_rule)
        coef = momentum_coefficient(alpha, alpha_next)
        R = D - L_new - E_new
        Y_hat_used = dual.Y_hat
        Y_older = dual.Y_prev
        dual.ascend(mu, R, coef, cfg.momentum)

        res2 = float(np.sum(R * R))
        trace.residual.append(np.sqrt(res2))
        trace.y_norm.append(float(np.linalg.norm(dual.Y)))
        trace.yhat_norm.append(float(np.linalg.norm(dual.Y_hat)))
        trace.dL.append(float(np.sum((L_new - L) ** 2)))
        trace.dE.append(float(np.sum((E_new - E) ** 2)))
        trace.L_norm.append(float(np.linalg.norm(L_new)))
        trace.E_norm.append(float(np.linalg.norm(E_new)))
        trace.lagrangian.append(
            penalty(cfg.spec, s) + cfg.lam * float(np.abs(E_new).sum())
            + float(np.sum(Y_hat_used * R)) + 0.5 * mu * res2
        )
        trace.mu.append(mu)
        trace.alpha.append(alpha_next)
        trace.coef.append(coef)
        # C^{k+1} needs Y^{k+1}, Y^k, Y^{k-1} and alpha^{k-1}, alpha^k, alpha^{k+1}
        if k >= 1:
            a_km1, a_k = alpha_hist[-2], alpha_hist[-1]
            a_used = (a_k, a_km1, alpha_next) if cfg.momentum else (1.0, 1.0, 1.0)
            trace.c_k.append(c_k(dual.Y, dual.Y_prev, Y_older, *a_used, mu * cfg.kappa, mu))
        else:
            trace.c_k.append(float("nan"))
        if truth is not None:
            trace.error_curve.append(float(np.linalg.norm(L_new - truth)))

        L, E = L_new, E_new
        alpha_hist = [alpha_hist[-1], alpha_next]
        mu = cfg.kappa * mu
        k += 1

        worst = max(trace.L_norm[-1], trace.E_norm[-1], trace.y_norm[-1], trace.yhat_norm[-1])
        if not np.isfinite(worst) or worst > guard > 0:
            raise DivergenceError(f"iterate norm {worst:.3e} exceeded guard at iteration {k}", trace)
        if res2 < cfg.feas_tol:
            converged = True
            break
    return RpcaResult(L, E, k, converged, trace, dual.Y, dual.Y_hat, mu)


def compare_variants(D, M, configs, max_points=150):
    """Error-per-iteration curves ``||L_k - M||_F``, one per config.

    ``D`` and ``M`` may each be a single matrix or a list of per-trial matrices.
    Curves stop at convergence (at most ``max_points`` long); shorter trials
    are padded with their final value before averaging across trials.
    """
    Ds = D if isinstance(D, (list, tuple)) else [D]
    Ms = M if isinstance(M, (list, tuple)) else [M]
    if len(Ds) != len(Ms):
        raise ValueError("need one ground truth per data matrix")
    curves = []
    for cfg in configs:
        per_trial = []
        for Dt, Mt in zip(Ds, Ms):
            res = rpca(Dt, cfg, truth=Mt)
            per_trial.append(np.asarray(res.trace.error_curve[:max_points]))
        n = max(len(c) for c in per_trial)
        padded = np.array([np.pad(c, (0, n - len(c)), mode="edge") for c in per_trial])
        curves.append(padded.mean(axis=0))
    return curves
