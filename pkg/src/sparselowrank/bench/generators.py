"""Seeded synthetic data for the experiments.

Every generator takes ``seed``: an int, a ``numpy.random.SeedSequence`` or a
``numpy.random.Generator``.  Randomness always comes from numpy's PCG64 bit
generator, so a given seed reproduces the same data on every platform.
"""
import numpy as np

from ..core import ObservationMask


def rng_from(seed):
    return np.random.default_rng(seed)


def trial_seeds(seed, trials):
    """Independent per-trial seed sequences spawned from one root seed."""
    return np.random.SeedSequence(seed).spawn(trials)


def gen_lowrank(m, n, d, seed, dist="normal"):
    """``M1 @ M2`` with i.i.d. factor entries (standard normal or uniform [0, 1])."""
    if not 1 <= d <= min(m, n):
        raise ValueError(f"rank {d} must lie in [1, min(m, n)]")
    rng = rng_from(seed)
    if dist == "normal":
        return rng.standard_normal((m, d)) @ rng.standard_normal((d, n))
    if dist == "uniform":
        return rng.uniform(size=(m, d)) @ rng.uniform(size=(d, n))
    raise ValueError(f"unknown factor distribution {dist!r}")


def _support(m, n, fraction, rng):
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    count = int(np.floor(fraction * m * n))
    return rng.choice(m * n, size=count, replace=False)


def gen_sparse_error(m, n, fraction, seed, magnitude="uniform"):
    """Error matrix with exactly ``floor(fraction * m * n)`` nonzeros at uniform positions.

    ``magnitude="uniform"`` draws values from U[-1, 1]; ``"sign"`` uses +-1.
    """
    rng = rng_from(seed)
    idx = _support(m, n, fraction, rng)
    E = np.zeros(m * n)
    if magnitude == "uniform":
        E[idx] = rng.uniform(-1.0, 1.0, size=idx.size)
    elif magnitude == "sign":
        E[idx] = rng.choice([-1.0, 1.0], size=idx.size)
    else:
        raise ValueError(f"unknown magnitude mode {magnitude!r}")
    return E.reshape(m, n)


def gen_mask(m, n, observed_fraction, seed):
    """Uniformly random set of exactly ``floor(observed_fraction * m * n)`` observed entries."""
    idx = np.sort(_support(m, n, observed_fraction, rng_from(seed)))
    return ObservationMask((m, n), np.column_stack(np.divmod(idx, n)))


def gen_subspaces(ambient=100, dim=10, k=10, samples_per=10, seed=0):
    """Samples from ``k`` independent ``dim``-dimensional subspaces.

    Bases are disjoint column blocks of one random orthogonal matrix, so the
    subspaces are mutually orthogonal.  Returns ``(D, labels)`` with the
    samples of subspace ``i`` stored contiguously.
    """
    if k * dim > ambient:
        raise ValueError(f"{k} subspaces of dimension {dim} do not fit in R^{ambient}")
    rng = rng_from(seed)
    Q, R = np.linalg.qr(rng.standard_normal((ambient, ambient)))
    Q = Q * np.sign(np.diag(R))
    blocks = [Q[:, i * dim:(i + 1) * dim] @ rng.standard_normal((dim, samples_per)) for i in range(k)]
    labels = np.repeat(np.arange(k), samples_per)
    return np.hstack(blocks), labels


def gen_outliers(ambient, count, seed, target_norm=1.0):
    """``count`` i.i.d. Gaussian columns, each rescaled to ``target_norm``."""
    rng = rng_from(seed)
    X = rng.standard_normal((ambient, count))
    return X * (target_norm / np.linalg.norm(X, axis=0))
