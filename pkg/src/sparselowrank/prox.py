"""Closed-form proximal maps used inside the solvers."""
import numpy as np

from .core import as_matrix, default_rank_cap, soft_threshold, svd
from .regularizers import RegularizerSpec, weight_vector

_FULL = "full"


def _resolve_cap(shape, rank_cap):
    if rank_cap == _FULL:
        return None
    if rank_cap is None:
        return default_rank_cap(shape)
    return min(int(rank_cap), min(shape))


def gsvt_factors(P, tau, spec, rank_cap=None):
    """Generalized SVT returning ``(X, shrunk_sigma)``.

    Each singular value of ``P`` is reduced by ``tau * supergradient(sigma_i)``
    and clipped at zero; weights come from ``P``'s own spectrum.  ``shrunk_sigma``
    is the spectrum of ``X`` in the same (nonincreasing) order.

    ``rank_cap=None`` picks the default (full up to 200 x 200, else 30);
    ``rank_cap="full"`` forces a full decomposition.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    A = as_matrix(P, "P")
    f = svd(A, _resolve_cap(A.shape, rank_cap))
    w = weight_vector(spec, f.sigma)
    s = np.maximum(f.sigma - tau * w, 0.0)
    keep = s > 0
    X = (f.U[:, keep] * s[keep]) @ f.V[:, keep].T
    return X, s


def gsvt(P, tau, spec, rank_cap=None):
    """``U diag((sigma - tau * w)_+) V^T`` with ``w_i = supergradient(spec, sigma_i)``."""
    return gsvt_factors(P, tau, spec, rank_cap)[0]


def svt(P, tau, rank_cap=None):
    """Plain singular value thresholding, ``gsvt`` with the nuclear norm at ``lam=1``."""
    return gsvt(P, tau, RegularizerSpec.nuclear(1.0), rank_cap)


def prox_l1(T, tau):
    """Elementwise soft thresholding: argmin_E tau*||E||_1 + 0.5*||E - T||_F^2."""
    return soft_threshold(np.asarray(T, dtype=np.float64), tau)


def prox_l21(T, tau):
    """Column shrinkage: argmin_E tau*sum_j ||e_j||_2 + 0.5*||E - T||_F^2."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    T = np.asarray(T, dtype=np.float64)
    norms = np.linalg.norm(T, axis=0)
    scale = np.zeros_like(norms)
    nz = norms > 0
    scale[nz] = np.maximum(1.0 - tau / norms[nz], 0.0)
    return T * scale
