"""Runtime checks mirroring the convergence theory of the momentum ADMM.

Limits cannot be observed, so each claim is checked as a finite-horizon
residual or growth condition on a finished solve.
"""
from dataclasses import dataclass

import numpy as np

from .prox import gsvt

DIVERGENCE_FACTOR = 1e6


def _beta(alpha_a, alpha_b):
    return (alpha_a - 1.0) / alpha_b


def c_k(Y_k, Y_km1, Y_km2, alpha_km1, alpha_km2, alpha_k, mu_k, mu_km1):
    """Per-iteration bound increment C^k in its expanded form.

    With ``b1 = (alpha_km1 - 1) / alpha_k``, ``b2 = (alpha_km2 - 1) / alpha_km1``
    and ``M = Y_k - (1 + b2) Y_km1 + b2 Y_km2``::

        C = [(mu_k + mu_km1) ||M||^2 + 2 b1 mu_km1 ||Y_k - Y_km1||^2
             - 2 b1 b2 mu_km1 <Y_km1 - Y_km2, Y_k - Y_km1>] / (2 mu_km1^2)
    """
    b1 = _beta(alpha_km1, alpha_k)
    b2 = _beta(alpha_km2, alpha_km1)
    M = Y_k - (1.0 + b2) * Y_km1 + b2 * Y_km2
    d1 = Y_k - Y_km1
    d0 = Y_km1 - Y_km2
    bracket = (
        (mu_k + mu_km1) * np.sum(M * M)
        + 2.0 * b1 * mu_km1 * np.sum(d1 * d1)
        - 2.0 * b1 * b2 * mu_km1 * np.sum(d0 * d1)
    )
    return float(bracket / (2.0 * mu_km1**2))


def c_k_inner_product(Y_k, Y_km1, Y_km2, alpha_km1, alpha_km2, alpha_k, mu_k, mu_km1):
    """C^k evaluated directly as ``0.5 (mu_k - mu_km1) ||R||^2 + <Yhat_k - Yhat_km1, R>``.

    ``R = (Y_k - Yhat_km1) / mu_km1`` is the primal residual and the
    extrapolated multipliers are rebuilt from the momentum update.  Used as an
    independent cross-check of :func:`c_k`.
    """
    Yhat_km1 = Y_km1 + _beta(alpha_km2, alpha_km1) * (Y_km1 - Y_km2)
    Yhat_k = Y_k + _beta(alpha_km1, alpha_k) * (Y_k - Y_km1)
    R = (Y_k - Yhat_km1) / mu_km1
    return float(0.5 * (mu_k - mu_km1) * np.sum(R * R) + np.sum((Yhat_k - Yhat_km1) * R))


@dataclass
class BoundednessReport:
    maxima: dict
    limit: float
    diverged: bool


def boundedness_report(trace, data_norm=None, factor=DIVERGENCE_FACTOR):
    """Maximum of every tracked norm; flag non-finite values or guard violations."""
    series = trace.norm_series()
    if not series:
        raise ValueError("trace is empty")
    maxima = {}
    diverged = False
    for name, vals in series.items():
        if not np.all(np.isfinite(vals)):
            diverged = True
            maxima[name] = float("inf")
        else:
            maxima[name] = float(vals.max()) if vals.size else 0.0
    limit = float("inf") if data_norm is None else factor * max(float(data_norm), 1e-300)
    if any(v > limit for v in maxima.values()):
        diverged = True
    return BoundednessReport(maxima, limit, diverged)


@dataclass
class KktReport:
    primal: float
    e_dual: float
    l_fixed_point: float


def _l1_dual_violation(Y, E, lam):
    on = E != 0
    v_on = np.abs(Y[on] - lam * np.sign(E[on]))
    v_off = np.maximum(np.abs(Y[~on]) - lam, 0.0)
    return float(max(v_on.max(initial=0.0), v_off.max(initial=0.0)))


def _l21_dual_violation(Y, E, lam):
    worst = 0.0
    norms = np.linalg.norm(E, axis=0)
    for j in range(E.shape[1]):
        y = Y[:, j]
        if norms[j] == 0:
            worst = max(worst, np.linalg.norm(y) - lam)
        else:
            worst = max(worst, np.linalg.norm(y - lam * E[:, j] / norms[j]))
    return float(max(worst, 0.0))


def e_dual_violation(Y, E, lam, mode="l1"):
    """Largest violation of ``Y in lam * subdifferential(||E||)``."""
    if mode == "l1":
        return _l1_dual_violation(Y, E, lam)
    if mode == "l21":
        return _l21_dual_violation(Y, E, lam)
    raise ValueError(f"unknown error norm {mode!r}")


def kkt_report(result, D, config):
    """Residual triple (primal, E-dual, L fixed point) for a finished RPCA solve.

    The E-dual check uses the last plain multiplier ``Y``; the L fixed point
    re-applies the low-rank update with the final ``Y_hat`` and ``mu``.
    """
    D = np.asarray(D, dtype=np.float64)
    L, E = result.L, result.E
    primal = float(np.linalg.norm(D - L - E))
    e_dual = e_dual_violation(result.Y, E, config.lam, "l1")
    L_again = gsvt(D - E + result.Y_hat / result.mu, 1.0 / result.mu, config.spec, config.rank_cap)
    fixed = float(np.linalg.norm(L - L_again) / max(1.0, np.linalg.norm(L)))
    return KktReport(primal, e_dual, fixed)


def lrr_kkt_report(result, problem):
    """Residual triple for a finished LRR solve.

    ``primal`` combines both constraint residuals, ``D - AZ - E`` and
    ``Z - L``.  The E-dual check uses ``Y1`` under the problem's column or
    entrywise norm, and the L fixed point re-applies the low-rank update
    with the final ``Y2_hat`` and ``mu``.
    """
    cfg = problem.config
    L, Z, E = result.L, result.Z, result.E
    r1 = np.linalg.norm(problem.D - problem.A @ Z - E)
    r2 = np.linalg.norm(Z - L)
    e_dual = e_dual_violation(result.Y1, E, cfg.lam, problem.gamma)
    L_again = gsvt(Z + result.Y2_hat / result.mu, 1.0 / result.mu, cfg.spec, cfg.rank_cap)
    fixed = float(np.linalg.norm(L - L_again) / max(1.0, np.linalg.norm(L)))
    return KktReport(float(np.hypot(r1, r2)), e_dual, fixed)


@dataclass
class RateRow:
    K: int
    min_step: float
    bound: float
    passed: bool


def rate_start(step_sums):
    """Index of the first nonzero step; earlier iterations are idle warm-up."""
    nz = np.flatnonzero(np.asarray(step_sums) > 0)
    return int(nz[0]) if nz.size else 0


def rate_report(trace, K_list=(20, 50, 100), fit_window=10):
    """Check ``min_{k<K} step_k <= C / K`` with ``C = fit_window * min_{k<fit_window} step_k``.

    Steps are the squared iterate changes summed over blocks.  Counting
    starts at the first nonzero step: while the thresholds still exceed every
    singular value the iterates stay at zero and carry no rate information.
    """
    steps = trace.step_sums()
    start = rate_start(steps)
    steps = steps[start:]
    if steps.size < max(K_list):
        raise ValueError(f"trace has {steps.size} active steps, need {max(K_list)}")
    C = fit_window * float(steps[:fit_window].min())
    rows = []
    for K in K_list:
        m = float(steps[:K].min())
        bound = C / K
        rows.append(RateRow(int(K), m, bound, m <= bound))
    return rows


def partial_sums_stable(c_series, window=10, rel=1e-6):
    """True when each of the last ``window`` C^k is below ``rel`` times the running sum."""
    c = np.asarray([v for v in c_series if np.isfinite(v)], dtype=np.float64)
    if c.size < window:
        return False
    total = np.cumsum(c)
    tail = c[-window:]
    ref = np.abs(total[-window:])
    return bool(np.all(np.abs(tail) < rel * ref))
