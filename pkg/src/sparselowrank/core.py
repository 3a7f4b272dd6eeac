"""Dense-matrix helpers shared by every solver: SVD, thresholding, metrics."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericalError(RuntimeError):
    """Raised when a linear-algebra kernel fails or produces non-finite output."""


def as_matrix(M, name="matrix"):
    """Validate ``M`` as a finite 2-D float64 array and return it."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf")
    return A


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``M ~= U @ diag(sigma) @ V.T``.

    ``U`` is m x r, ``V`` is n x r (not transposed), ``sigma`` has length r and
    is sorted nonincreasing.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]

    def reconstruct(self, sigma=None):
        s = self.sigma if sigma is None else sigma
        return (self.U * s) @ self.V.T


def _fix_signs(U, V):
    # largest-magnitude entry of each U column made nonnegative
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def _full_svd(A):
    # divide-and-conquer (gesdd) first; on its rare convergence failures retry
    # with the slower but more robust QR-iteration driver (gesvd)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge: {exc}") from exc
    return U, s, Vt.T


def _randomized_svd(A, k, oversample=10, n_power=2, seed=0):
    m, n = A.shape
    ell = min(k + oversample, min(m, n))
    rng = np.random.default_rng(seed)
    Q = A @ rng.standard_normal((n, ell))
    Q, _ = np.linalg.qr(Q)
    for _ in range(n_power):
        Q, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Q)
    B = Q.T @ A
    Ub, s, V = _full_svd(B)
    return (Q @ Ub)[:, :k], s[:k], V[:, :k]


def svd(M, rank_cap=None):
    """Thin SVD of ``M``, optionally restricted to the leading ``rank_cap`` triplets.

    Full decompositions go through LAPACK. Capped ones use a randomized range
    finder (oversampling 10, two power iterations, fixed internal seed), which
    is exact when ``rank(M) <= rank_cap``.

    Raises:
        NumericalError: the backend failed to converge or returned non-finite values.
    """
    A = as_matrix(M)
    full = min(A.shape)
    if rank_cap is not None:
        rank_cap = int(rank_cap)
        if rank_cap < 1 or rank_cap > full:
            raise ValueError(f"rank_cap must lie in [1, {full}], got {rank_cap}")
    if rank_cap is None or rank_cap == full:
        U, s, V = _full_svd(A)
    else:
        U, s, V = _randomized_svd(A, rank_cap)
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(s)) and np.all(np.isfinite(V))):
        raise NumericalError("SVD returned non-finite factors")
    s = np.maximum(s, 0.0)
    U, V = _fix_signs(U, V)
    return SvdFactors(U=U, sigma=s, V=V)


def default_rank_cap(shape):
    """Full SVD up to 200 x 200, otherwise the leading 30 singular values."""
    m, n = shape
    if m <= 200 and n <= 200:
        return None
    return min(30, m, n)


def soft_threshold(x, tau):
    """``sign(x) * max(|x| - tau, 0)``, elementwise for arrays."""
    if np.any(np.asarray(tau) < 0):
        raise ValueError("tau must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def relative_error(X, O):
    """``||X - O||_F / ||O||_F``."""
    X = np.asarray(X, dtype=np.float64)
    O = np.asarray(O, dtype=np.float64)
    if X.shape != O.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {O.shape}")
    denom = np.linalg.norm(O)
    if denom == 0.0:
        raise ZeroDivisionError("reference matrix is all zeros")
    return float(np.linalg.norm(X - O) / denom)


def psnr(X, O, peak=1.0):
    """Peak signal-to-noise ratio in dB. Identical inputs give ``math.inf``."""
    X = np.asarray(X, dtype=np.float64)
    O = np.asarray(O, dtype=np.float64)
    if X.shape != O.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {O.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((X - O) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


class ObservationMask:
    """Set of observed ``(i, j)`` positions in a ``rows x cols`` matrix."""

    def __init__(self, shape, indices):
        rows, cols = (int(shape[0]), int(shape[1]))
        idx = np.asarray(indices, dtype=np.int64).reshape(-1, 2)
        if idx.size and (idx.min() < 0 or np.any(idx[:, 0] >= rows) or np.any(idx[:, 1] >= cols)):
            raise ValueError("mask index out of bounds")
        flat = idx[:, 0] * cols + idx[:, 1]
        if np.unique(flat).size != flat.size:
            raise ValueError("duplicate mask indices")
        self.shape = (rows, cols)
        self.indices = idx
        self._dense = np.zeros(self.shape, dtype=bool)
        self._dense[idx[:, 0], idx[:, 1]] = True

    @classmethod
    def from_bool(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        return cls(mask.shape, np.argwhere(mask))

    @property
    def dense(self):
        return self._dense.copy()

    def __len__(self):
        return self.indices.shape[0]

    def project(self, X):
        """P_Omega: keep observed entries, zero the rest."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape != self.shape:
            raise ValueError(f"shape mismatch {X.shape} vs mask {self.shape}")
        return np.where(self._dense, X, 0.0)
