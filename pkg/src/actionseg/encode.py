"""Window encodings: Fisher vectors and bag-of-words histograms.

A Fisher vector accumulates the first and second order deviations of a
feature set from the vocabulary GMM.  With responsibilities gamma_n(k),

    G_mu_k    = 1/(N sqrt(w_k))   * sum_n gamma_n(k) (f_n - mu_k) / sigma_k
    G_sigma_k = 1/(N sqrt(2 w_k)) * sum_n gamma_n(k) [ (f_n - mu_k)^2 / sigma_k^2 - 1 ]

(elementwise over dimensions, sigma_k the per-dimension standard
deviation).  The encoding concatenates [G_mu_1..G_mu_K, G_sigma_1..
G_sigma_K], giving 2*D*K values.  Weight deviations are not included.

Input features must already be standardized with the vocabulary's
standardizer.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, EmptyWindowError
from .vocab import Codebook, GmmVocabulary, log_responsibilities


@dataclass(frozen=True)
class FisherVector:
    values: np.ndarray  # (2*D*K,)
    normalized: bool = False


@dataclass(frozen=True)
class BowHistogram:
    values: np.ndarray  # (K,)


def fisher_encode(gmm: GmmVocabulary, X: np.ndarray) -> FisherVector:
    """Unnormalized Fisher vector of a standardized feature set (N, D)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise EmptyWindowError("cannot encode an empty feature set")
    n, d = X.shape
    if d != gmm.dim:
        raise ArgumentError(f"feature dim {d} != vocabulary dim {gmm.dim}")

    gamma = np.exp(log_responsibilities(gmm, X))       # (N, K)
    sigma = np.sqrt(gmm.variances)                     # (K, D)

    gamma_sum = gamma.sum(axis=0)                      # (K,)
    gx = gamma.T @ X                                   # (K, D)
    gx2 = gamma.T @ (X ** 2)                           # (K, D)

    mu, var = gmm.means, gmm.variances
    g_mu = (gx - gamma_sum[:, None] * mu) / sigma
    g_mu /= n * np.sqrt(gmm.weights)[:, None]
    g_sigma = (gx2 - 2.0 * mu * gx + gamma_sum[:, None] * (mu ** 2)) / var
    g_sigma -= gamma_sum[:, None]
    g_sigma /= n * np.sqrt(2.0 * gmm.weights)[:, None]

    return FisherVector(values=np.concatenate([g_mu.ravel(), g_sigma.ravel()]),
                        normalized=False)


def normalize_fv(fv: FisherVector, alpha: float = 0.5) -> FisherVector:
    """Signed power normalization followed by L2 normalization.

    The all-zero vector maps to itself.
    """
    if not 0.0 < alpha <= 1.0:
        raise ArgumentError("alpha must lie in (0, 1]")
    if fv.normalized:
        raise ArgumentError("Fisher vector is already normalized")
    z = np.sign(fv.values) * np.abs(fv.values) ** alpha
    norm = np.linalg.norm(z)
    if norm > 0:
        z = z / norm
    return FisherVector(values=z, normalized=True)


def bow_encode(codebook: Codebook, X: np.ndarray) -> BowHistogram:
    """L1-normalized histogram of hard assignments to nearest centers.

    Ties break toward the lowest center index.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise EmptyWindowError("cannot encode an empty feature set")
    if X.shape[1] != codebook.dim:
        raise ArgumentError(f"feature dim {X.shape[1]} != codebook dim {codebook.dim}")
    d2 = (
        np.sum(X ** 2, axis=1)[:, None]
        - 2.0 * X @ codebook.centers.T
        + np.sum(codebook.centers ** 2, axis=1)[None, :]
    )
    nearest = np.argmin(d2, axis=1)
    counts = np.bincount(nearest, minlength=codebook.K).astype(np.float64)
    return BowHistogram(values=counts / X.shape[0])
