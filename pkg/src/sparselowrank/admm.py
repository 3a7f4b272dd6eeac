"""Pieces shared by the RPCA and LRR ADMM solvers."""
import math
from dataclasses import dataclass, field

import numpy as np

from .regularizers import RegularizerSpec

ALPHA_RULES = ("sqrt", "fista", "frozen")


class DivergenceError(RuntimeError):
    """An iterate went non-finite or blew past the divergence guard."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass
class SolverConfig:
    """ADMM settings.

    ``lam`` weights the sparse-error norm; the low-rank surrogate carries its
    own penalty in ``spec.lam``.  ``alpha_rule`` selects the momentum sequence:
    ``"sqrt"`` is ``sqrt(1 + 4 a^2) / 2``, ``"fista"`` is
    ``(1 + sqrt(1 + 4 a^2)) / 2`` and ``"frozen"`` keeps ``alpha = 1``.
    """

    lam: float = 0.1
    mu0: float = 1e-3
    kappa: float = 1.2
    max_iter: int = 150
    feas_tol: float = 1e-9
    momentum: bool = False
    spec: RegularizerSpec = field(default_factory=RegularizerSpec.nuclear)
    alpha_rule: str = "sqrt"
    rank_cap: object = None
    divergence_factor: float = 1e6

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if not self.kappa > 1:
            raise ValueError("kappa must exceed 1")
        if not self.feas_tol > 0:
            raise ValueError("feas_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.alpha_rule not in ALPHA_RULES:
            raise ValueError(f"alpha_rule must be one of {ALPHA_RULES}")


def advance_alpha(alpha, rule="sqrt"):
    """Next momentum weight.  With ``alpha0 = 1`` the sqrt rule gives sqrt(1 + k/4)."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if rule == "sqrt":
        return math.sqrt(1.0 + 4.0 * alpha * alpha) / 2.0
    if rule == "fista":
        return (1.0 + math.sqrt(1.0 + 4.0 * alpha * alpha)) / 2.0
    if rule == "frozen":
        return 1.0
    raise ValueError(f"unknown alpha rule {rule!r}")


def momentum_coefficient(alpha, alpha_next):
    return (alpha - 1.0) / alpha_next


@dataclass
class MomentumState:
    """One multiplier with dual momentum.

    ``Y`` is the plain ascent iterate and ``Y_hat`` the extrapolated multiplier
    the subproblems actually use.  ``Y_prev`` is kept for the C^k series.
    """

    Y: np.ndarray
    Y_hat: np.ndarray
    Y_prev: np.ndarray = None

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))

    def ascend(self, mu, residual, coef, momentum):
        Y_new = self.Y_hat + mu * residual
        if momentum:
            Y_hat_new = Y_new + coef * (Y_new - self.Y)
        else:
            Y_hat_new = Y_new
        self.Y_prev, self.Y, self.Y_hat = self.Y, Y_new, Y_hat_new


@dataclass
class SolveTrace:
    """Per-iteration records; every list has one entry per iteration.

    ``c_k`` is NaN for the first iteration, where the series is undefined.
    LRR fills ``residual2`` (``||Z - L||_F``), ``y2_norm``, ``yhat2_norm`` and
    ``dZ`` as well.
    """

    residual: list = field(default_factory=list)
    y_norm: list = field(default_factory=list)
    yhat_norm: list = field(default_factory=list)
    dL: list = field(default_factory=list)
    dE: list = field(default_factory=list)
    L_norm: list = field(default_factory=list)
    E_norm: list = field(default_factory=list)
    c_k: list = field(default_factory=list)
    lagrangian: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    coef: list = field(default_factory=list)
    residual2: list = field(default_factory=list)
    y2_norm: list = field(default_factory=list)
    yhat2_norm: list = field(default_factory=list)
    dZ: list = field(default_factory=list)
    Z_norm: list = field(default_factory=list)
    error_curve: list = field(default_factory=list)

    def __len__(self):
        return len(self.residual)

    def step_sums(self):
        s = np.asarray(self.dL) + np.asarray(self.dE)
        if self.dZ:
            s = s + np.asarray(self.dZ)
        return s

    def norm_series(self):
        """Mapping of tracked norm name -> array, for boundedness checks."""
        out = {}
        for name in ("y_norm", "yhat_norm", "L_norm", "E_norm", "y2_norm", "yhat2_norm", "Z_norm"):
            vals = getattr(self, name)
            if vals:
                out[name] = np.asarray(vals, dtype=np.float64)
        return out
