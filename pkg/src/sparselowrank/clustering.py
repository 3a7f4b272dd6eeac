"""Subspace clustering on top of an LRR representation."""
import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans

from .core import as_matrix, svd


def affinity(Z, rank_tol=1e-6):
    """Affinity ``W_ij = (H_ij)^2`` with ``H = U_r S_r U_r^T`` from the SVD of ``Z``.

    Only singular values above ``rank_tol * sigma_1`` are kept, so ``H`` is the
    Gram matrix of the rows of ``U_r S_r^(1/2)``.
    """
    Z = as_matrix(Z, "Z")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    f = svd(Z)
    if f.sigma.size == 0 or f.sigma[0] <= 1e-300:
        raise ValueError("representation is numerically zero")
    keep = f.sigma > rank_tol * f.sigma[0]
    Ut = f.U[:, keep] * np.sqrt(f.sigma[keep])
    H = Ut @ Ut.T
    H = 0.5 * (H + H.T)
    return H * H


def spectral_embedding(W, k):
    """Row-normalized top-``k`` eigenvectors of ``D^-1/2 W D^-1/2``."""
    W = np.asarray(W, dtype=np.float64)
    deg = W.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    N = inv_sqrt[:, None] * W * inv_sqrt[None, :]
    N = 0.5 * (N + N.T)
    _, vecs = np.linalg.eigh(N)
    X = vecs[:, -k:][:, ::-1]
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return X / norms


def spectral_cluster(W, k, seed=0, outliers=None, n_init=20):
    """Normalized spectral clustering with seeded k-means++ (``n_init`` restarts).

    Samples flagged in ``outliers`` (boolean mask) are left out of the
    embedding and labelled ``-1``.  Samples with an all-zero affinity row are
    treated the same way.
    """
    W = np.asarray(W, dtype=np.float64)
    if k < 2:
        raise ValueError("k must be at least 2")
    n = W.shape[0]
    drop = np.zeros(n, dtype=bool) if outliers is None else np.asarray(outliers, dtype=bool).copy()
    off = W - np.diag(np.diag(W))
    drop |= off.sum(axis=1) <= 0
    keep = np.flatnonzero(~drop)
    labels = np.full(n, -1, dtype=np.int64)
    if keep.size < k:
        raise ValueError(f"only {keep.size} usable samples for {k} clusters")
    X = spectral_embedding(W[np.ix_(keep, keep)], k)
    km = KMeans(n_clusters=k, init="k-means++", n_init=n_init, random_state=seed)
    labels[keep] = km.fit_predict(X)
    return labels


def accuracy(pred, truth, outliers=None):
    """Best fraction of matching labels over all relabelings (Hungarian matching).

    Samples marked in ``outliers`` or carrying a negative ground-truth label
    are excluded.  A prediction of ``-1`` on a scored sample counts as wrong.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("label vectors differ in length")
    use = truth >= 0
    if outliers is not None:
        use &= ~np.asarray(outliers, dtype=bool)
    p, t = pred[use], truth[use]
    if t.size == 0:
        raise ValueError("no samples left to score")
    p_ids = np.unique(p[p >= 0])
    t_ids = np.unique(t)
    C = np.zeros((p_ids.size, t_ids.size), dtype=np.int64)
    for i, a in enumerate(p_ids):
        for j, b in enumerate(t_ids):
            C[i, j] = np.sum((p == a) & (t == b))
    rows, cols = linear_sum_assignment(-C)
    return float(C[rows, cols].sum() / t.size)


def detect_outliers(W, threshold_fraction=0.1):
    """Flag samples whose off-diagonal affinity mass is below a fraction of the median."""
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    W = np.asarray(W, dtype=np.float64)
    row = W.sum(axis=1) - np.diag(W)
    return row < threshold_fraction * np.median(row)
