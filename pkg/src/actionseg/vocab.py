"""Visual vocabularies: a diagonal GMM (probabilistic) and a k-means codebook.

Features are standardized to zero mean / unit variance per dimension before
any clustering; the transform is stored with the vocabulary and must be
applied to features at encode time.  Fits are bitwise deterministic for a
given (pool, K, seed).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import jsonio
from .errors import ArgumentError, FormatError, NumericalError

VOCAB_FORMAT_VERSION = 1

# Fraction of the pooled per-dimension variance below which component
# variances are clamped, preventing collapse onto single points.
VARIANCE_FLOOR_FRACTION = 1e-3

_STD_FLOOR = 1e-6


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension affine transform to zero mean, unit variance."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, vectors: np.ndarray) -> "Standardizer":
        vectors = np.asarray(vectors, dtype=np.float64)
        mean = vectors.mean(axis=0)
        std = np.maximum(vectors.std(axis=0), _STD_FLOOR)
        return cls(mean=mean, std=std)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        return (np.asarray(vectors, dtype=np.float64) - self.mean) / self.std

    def invert(self, vectors: np.ndarray) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) * self.std + self.mean


@dataclass(frozen=True)
class TrainingPool:
    """Standardized training vectors pooled across actions."""

    vectors: np.ndarray  # (N, D), standardized
    per_action_counts: dict
    standardizer: Standardizer

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class GmmVocabulary:
    """Diagonal Gaussian mixture {w_k, mu_k, var_k} plus standardizer."""

    weights: np.ndarray           # (K,)
    means: np.ndarray             # (K, D)
    variances: np.ndarray         # (K, D)
    standardizer: Standardizer
    log_likelihoods: np.ndarray = field(default=None, compare=False)

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class Codebook:
    """Hard-assignment k-means codebook for BoW encoding."""

    centers: np.ndarray  # (K, D)
    standardizer: Standardizer
    inertias: np.ndarray = field(default=None, compare=False)

    @property
    def K(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def build_pool(features_by_action: dict, cap: int = 100_000,
               seed: int = 0) -> TrainingPool:
    """Sample up to ``cap`` vectors per action, pool, and standardize.

    Sampling is uniform without replacement and deterministic in ``seed``.
    Actions are processed in sorted key order so the result does not depend
    on dict insertion order.
    """
    if cap < 1:
        raise ArgumentError("cap must be >= 1")
    rng = np.random.default_rng(seed)
    chunks = []
    counts = {}
    for action in sorted(features_by_action):
        vectors = np.asarray(features_by_action[action], dtype=np.float64)
        if vectors.size == 0:
            continue
        if vectors.ndim != 2:
            raise ArgumentError(f"action {action!r}: features must be (N, D)")
        n = vectors.shape[0]
        if n > cap:
            keep = np.sort(rng.choice(n, size=cap, replace=False))
            vectors = vectors[keep]
        chunks.append(vectors)
        counts[action] = vectors.shape[0]
    if not chunks:
        raise ArgumentError("no feature vectors supplied")
    pooled = np.concatenate(chunks, axis=0)
    standardizer = Standardizer.fit(pooled)
    return TrainingPool(vectors=standardizer.apply(pooled),
                        per_action_counts=counts,
                        standardizer=standardizer)


def _kmeans_pp_init(vectors, K, rng):
    n = vectors.shape[0]
    centers = np.empty((K, vectors.shape[1]))
    centers[0] = vectors[rng.integers(n)]
    d2 = np.sum((vectors - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            centers[k] = vectors[rng.integers(n)]
            continue
        centers[k] = vectors[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((vectors - centers[k]) ** 2, axis=1))
    return centers


def _assign(vectors, centers):
    # squared Euclidean distances; argmin breaks ties toward lower index
    d2 = (
        np.sum(vectors ** 2, axis=1)[:, None]
        - 2.0 * vectors @ centers.T
        + np.sum(centers ** 2, axis=1)[None, :]
    )
    return np.argmin(d2, axis=1), d2


def kmeans_fit(pool: TrainingPool, K: int, seed: int = 0,
               max_iter: int = 50) -> Codebook:
    """Lloyd's algorithm with k-means++ seeding.

    Iterates until the assignment reaches a fixpoint or ``max_iter``
    passes; empty clusters are reseeded to the point farthest from its
    current center.
    """
    vectors = pool.vectors
    if K < 1:
        raise ArgumentError("K must be >= 1")
    if pool.size < K:
        raise ArgumentError(f"pool size {pool.size} < K={K}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(vectors, K, rng)
    assign = None
    inertias = []
    for _ in range(max_iter):
        new_assign, d2 = _assign(vectors, centers)
        inertias.append(float(np.maximum(d2[np.arange(vectors.shape[0]), new_assign], 0).sum()))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for k in range(K):
            members = vectors[assign == k]
            if members.shape[0] == 0:
                farthest = np.argmax(d2[np.arange(vectors.shape[0]), assign])
                centers[k] = vectors[farthest]
            else:
                centers[k] = members.mean(axis=0)
    return Codebook(centers=centers, standardizer=pool.standardizer,
                    inertias=np.asarray(inertias))


def _log_gaussians(X, weights, means, variances):
    """Log of w_k * N(x | mu_k, var_k) for every (point, component) pair."""
    const = -0.5 * (np.log(2.0 * np.pi) * means.shape[1]
                    + np.sum(np.log(variances), axis=1))
    # (N, K) quadratic term via expansion, all in float64
    quad = (
        (X ** 2) @ (0.5 / variances).T
        - X @ (means / variances).T
        + 0.5 * np.sum(means ** 2 / variances, axis=1)[None, :]
    )
    return np.log(weights)[None, :] + const[None, :] - quad


def gmm_fit(pool: TrainingPool, K: int, seed: int = 0, max_iter: int = 100,
            rel_tol: float = 1e-5) -> GmmVocabulary:
    """Fit a diagonal GMM by EM, initialized from a k-means partition.

    Initial weights are proportional to cluster sizes and variances are
    the within-cluster variances (floored).  EM stops when the relative
    improvement of the average log-likelihood drops below ``rel_tol``.
    The per-iteration average log-likelihood is kept on the result.
    """
    X = pool.vectors
    if pool.size < 10 * K:
        raise ArgumentError(f"pool size {pool.size} < 10*K={10 * K}")
    floor = np.maximum(VARIANCE_FLOOR_FRACTION * X.var(axis=0), 1e-10)

    codebook = kmeans_fit(pool, K, seed=seed)
    assign, _ = _assign(X, codebook.centers)
    weights = np.empty(K)
    means = codebook.centers.copy()
    variances = np.empty_like(means)
    for k in range(K):
        members = X[assign == k]
        weights[k] = max(members.shape[0], 1)
        if members.shape[0] > 0:
            means[k] = members.mean(axis=0)
            variances[k] = np.maximum(members.var(axis=0), floor)
        else:
            variances[k] = 1.0
    weights /= weights.sum()

    ll_path = []
    prev_ll = None
    for _ in range(max_iter):
        log_joint = _log_gaussians(X, weights, means, variances)
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(log_norm.mean())
        if not np.isfinite(ll):
            raise NumericalError("non-finite log-likelihood during EM")
        ll_path.append(ll)
        if prev_ll is not None and ll - prev_ll < rel_tol * abs(prev_ll):
            break
        prev_ll = ll

        resp = np.exp(log_joint - log_norm[:, None])  # (N, K)
        nk = resp.sum(axis=0)
        safe_nk = np.maximum(nk, 1e-12)
        new_means = (resp.T @ X) / safe_nk[:, None]
        sq = (resp.T @ (X ** 2)) / safe_nk[:, None]
        new_vars = np.maximum(sq - new_means ** 2, floor)
        weights = np.maximum(nk / X.shape[0], 1e-12)
        weights /= weights.sum()
        means, variances = new_means, new_vars

    return GmmVocabulary(weights=weights, means=means, variances=variances,
                         standardizer=pool.standardizer,
                         log_likelihoods=np.asarray(ll_path))


def log_responsibilities(gmm: GmmVocabulary, X: np.ndarray) -> np.ndarray:
    """Log posterior component probabilities for standardized points (N, D)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.all(np.isfinite(X)):
        raise ArgumentError("features must be finite")
    if X.shape[1] != gmm.dim:
        raise ArgumentError(f"feature dim {X.shape[1]} != vocabulary dim {gmm.dim}")
    log_joint = _log_gaussians(X, gmm.weights, gmm.means, gmm.variances)
    return log_joint - logsumexp(log_joint, axis=1)[:, None]


def posterior(gmm: GmmVocabulary, f: np.ndarray) -> np.ndarray:
    """Component posteriors gamma_k for a single standardized vector."""
    return np.exp(log_responsibilities(gmm, f))[0]


def sample_gmm(gmm: GmmVocabulary, n: int, seed: int = 0) -> np.ndarray:
    """Draw n points from the mixture (in standardized feature space)."""
    rng = np.random.default_rng(seed)
    comps = rng.choice(gmm.K, size=n, p=gmm.weights / gmm.weights.sum())
    noise = rng.standard_normal((n, gmm.dim))
    return gmm.means[comps] + noise * np.sqrt(gmm.variances[comps])


def _std_to_dict(std: Standardizer) -> dict:
    return {"mean": std.mean.tolist(), "std": std.std.tolist()}


def _std_from_dict(obj) -> Standardizer:
    return Standardizer(mean=np.asarray(obj["mean"], dtype=np.float64),
                        std=np.asarray(obj["std"], dtype=np.float64))


def save_vocabulary(vocab, path) -> None:
    """Serialize a GmmVocabulary or Codebook as JSON (exact round-trip)."""
    if isinstance(vocab, GmmVocabulary):
        doc = {
            "version": VOCAB_FORMAT_VERSION,
            "type": "gmm",
            "K": vocab.K,
            "D": vocab.dim,
            "weights": vocab.weights.tolist(),
            "means": vocab.means.tolist(),
            "vars": vocab.variances.tolist(),
            "standardizer": _std_to_dict(vocab.standardizer),
        }
    elif isinstance(vocab, Codebook):
        doc = {
            "version": VOCAB_FORMAT_VERSION,
            "type": "codebook",
            "K": vocab.K,
            "D": vocab.dim,
            "centers": vocab.centers.tolist(),
            "standardizer": _std_to_dict(vocab.standardizer),
        }
    else:
        raise ArgumentError(f"cannot serialize vocabulary of type {type(vocab)}")
    jsonio.dump_file(doc, path)


def load_vocabulary(path):
    doc = jsonio.load_file(path)
    try:
        kind = doc.get("type", "gmm")
        std = _std_from_dict(doc["standardizer"])
        if kind == "gmm":
            return GmmVocabulary(
                weights=np.asarray(doc["weights"], dtype=np.float64),
                means=np.asarray(doc["means"], dtype=np.float64),
                variances=np.asarray(doc["vars"], dtype=np.float64),
                standardizer=std,
            )
        if kind == "codebook":
            return Codebook(
                centers=np.asarray(doc["centers"], dtype=np.float64),
                standardizer=std,
            )
    except KeyError as exc:
        raise FormatError(f"{path}: missing vocabulary field {exc}") from exc
    raise FormatError(f"{path}: unknown vocabulary type {kind!r}")
