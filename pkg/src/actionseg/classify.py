"""Linear multi-class classification with calibrated probabilities.

One L2-regularized hinge-loss classifier per class (one-vs-rest), trained
by dual coordinate descent with a seeded permutation schedule, so training
is bitwise reproducible.  Raw scores are mapped to per-class sigmoid
probabilities (Platt scaling, fitted on 3-fold cross-scores) and then
renormalized to a distribution over classes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import ArgumentError, FormatError, InsufficientDataError
from .encode import BowHistogram, FisherVector

DUALITY_GAP_TOL = 1e-4


@dataclass(frozen=True)
class LinearSvmModel:
    weights: np.ndarray  # (A, dim)
    biases: np.ndarray   # (A,)
    # per-class dual objective after each epoch; dual coordinate descent
    # improves this monotonically (the primal is not monotone per epoch)
    dual_objectives: tuple = field(default=None, compare=False)

    @property
    def A(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class PlattParams:
    a: np.ndarray  # (A,)
    b: np.ndarray  # (A,)


@dataclass(frozen=True)
class ModelBundle:
    """Everything cmd_segment needs: SVM, calibration, names, vocabulary tag."""

    svm: LinearSvmModel
    platt: PlattParams
    class_names: list
    vocab_ref: str
    encoder: str = "fv"
    fv_norm: bool = True


def as_vector(v) -> np.ndarray:
    if isinstance(v, (FisherVector, BowHistogram)):
        v = v.values
    return np.asarray(v, dtype=np.float64)


def _binary_dual_cd(X_aug, y, C, epochs, rng):
    """Dual coordinate descent for the L1-loss (hinge) linear SVM.

    ``X_aug`` carries a trailing constant-1 column so the bias is learned
    as the last weight.  Returns the augmented weight vector.  Stops after
    ``epochs`` passes or once the duality gap drops below DUALITY_GAP_TOL.
    """
    n = X_aug.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(X_aug.shape[1])
    q_diag = np.einsum("ij,ij->i", X_aug, X_aug)

    duals = []
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            if q_diag[i] <= 0:
                continue
            g = y[i] * (X_aug[i] @ w) - 1.0
            a_old = alpha[i]
            a_new = min(max(a_old - g / q_diag[i], 0.0), C)
            if a_new != a_old:
                w += (a_new - a_old) * y[i] * X_aug[i]
                alpha[i] = a_new
        margins = 1.0 - y * (X_aug @ w)
        primal = 0.5 * (w @ w) + C * np.sum(np.maximum(margins, 0.0))
        dual = alpha.sum() - 0.5 * (w @ w)
        duals.append(dual)
        if primal - dual < DUALITY_GAP_TOL:
            break
    return w, np.asarray(duals)


def svm_train(samples, A: int, C: float = 1.0, epochs: int = 50,
              seed: int = 0) -> LinearSvmModel:
    """Train one-vs-rest linear SVMs on (vector, label) pairs.

    Labels are 1-based class ids in [1, A]; at least two distinct classes
    must be present.  Deterministic for a fixed seed.
    """
    if not samples:
        raise ArgumentError("no training samples")
    X = np.stack([as_vector(v) for v, _ in samples])
    labels = np.asarray([lab for _, lab in samples], dtype=np.int64)
    if np.unique(labels).size < 2:
        raise ArgumentError("training data must contain at least 2 classes")
    if labels.min() < 1 or labels.max() > A:
        raise ArgumentError(f"labels must lie in [1, {A}]")
    if C <= 0:
        raise ArgumentError("C must be positive")

    X_aug = np.hstack([X, np.ones((X.shape[0], 1))])
    weights = np.empty((A, X.shape[1]))
    biases = np.empty(A)
    duals = []
    for cls in range(1, A + 1):
        rng = np.random.default_rng((seed, cls))
        y = np.where(labels == cls, 1.0, -1.0)
        w_aug, dual_path = _binary_dual_cd(X_aug, y, C, epochs, rng)
        weights[cls - 1] = w_aug[:-1]
        biases[cls - 1] = w_aug[-1]
        duals.append(dual_path)
    return LinearSvmModel(weights=weights, biases=biases, dual_objectives=tuple(duals))


def svm_scores(model: LinearSvmModel, fv) -> np.ndarray:
    """Raw decision scores <w_l, fv> + b_l for every class."""
    v = as_vector(fv)
    if v.shape != (model.dim,):
        raise ArgumentError(f"vector dim {v.shape} != model dim {model.dim}")
    return model.weights @ v + model.biases


def _fit_sigmoid(scores, is_pos, max_iter):
    """Newton fit of P(y=1|s) = 1/(1+exp(a*s + b)) with Platt's targets.

    Robust formulation from Lin, Lin & Weng: works on log-scale
    likelihoods to avoid overflow for large |a*s + b|.
    """
    n_pos = int(np.sum(is_pos))
    n_neg = len(is_pos) - n_pos
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(is_pos, hi, lo)

    a, b = 0.0, np.log((n_neg + 1.0) / (n_pos + 1.0))
    sigma = 1e-12  # Levenberg-Marquardt damping

    def objective(a_, b_):
        f = a_ * scores + b_
        # t*f + log(1 + exp(-f)), stable for both signs of f
        return float(np.sum(np.where(f >= 0, t * f + np.log1p(np.exp(-f)),
                                     (t - 1.0) * f + np.log1p(np.exp(f)))))

    fval = objective(a, b)
    for _ in range(max_iter):
        f = a * scores + b
        p = np.where(f >= 0, np.exp(-f) / (1.0 + np.exp(-f)),
                     1.0 / (1.0 + np.exp(f)))
        d1 = t - p                      # dF/df per sample
        d2 = p * (1.0 - p)
        g_a = float(np.sum(scores * d1))
        g_b = float(np.sum(d1))
        if abs(g_a) < 1e-10 and abs(g_b) < 1e-10:
            break
        h_aa = float(np.sum(scores * scores * d2)) + sigma
        h_bb = float(np.sum(d2)) + sigma
        h_ab = float(np.sum(scores * d2))
        det = h_aa * h_bb - h_ab * h_ab
        da = -(h_bb * g_a - h_ab * g_b) / det
        db = -(h_aa * g_b - h_ab * g_a) / det

        step = 1.0
        g_dot_d = g_a * da + g_b * db
        while step >= 1e-10:
            a_new, b_new = a + step * da, b + step * db
            f_new = objective(a_new, b_new)
            if f_new < fval + 1e-4 * step * g_dot_d:
                a, b, fval = a_new, b_new, f_new
                break
            step /= 2.0
        else:
            break
    return a, b


def platt_fit(scores_per_sample, labels, max_iter: int = 100) -> PlattParams:
    """Per-class sigmoid calibration on held-out score/label pairs.

    ``scores_per_sample`` is (n, A); labels are 1-based.  Every per-class
    fit sees all n samples; fits with fewer than 10 samples or fewer than
    2 positives are refused.
    """
    scores = np.asarray(scores_per_sample, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim != 2 or scores.shape[0] != labels.size:
        raise ArgumentError("scores must be (n, A) aligned with labels")
    n, A = scores.shape
    if n < 10:
        raise InsufficientDataError(f"only {n} scored samples; need >= 10 per class fit")

    a = np.empty(A)
    b = np.empty(A)
    for cls in range(1, A + 1):
        is_pos = labels == cls
        if int(is_pos.sum()) < 2:
            raise InsufficientDataError(
                f"class {cls} has {int(is_pos.sum())} scored samples; need >= 2"
            )
        a[cls - 1], b[cls - 1] = _fit_sigmoid(scores[:, cls - 1], is_pos, max_iter)
    return PlattParams(a=a, b=b)


def _sigmoid_prob(platt: PlattParams, scores: np.ndarray) -> np.ndarray:
    f = platt.a * scores + platt.b
    return np.where(f >= 0, np.exp(-f) / (1.0 + np.exp(-f)), 1.0 / (1.0 + np.exp(f)))


def predict_proba(model: LinearSvmModel, platt: PlattParams, fv) -> np.ndarray:
    """Calibrated class distribution for one encoded window.

    Per-class sigmoids are strictly positive, so the renormalization is
    well defined and preserves their argmax.
    """
    p = _sigmoid_prob(platt, svm_scores(model, fv))
    return p / p.sum()


def cross_val_scores(samples, A: int, C: float = 1.0, epochs: int = 50,
                     seed: int = 0, n_folds: int = 3):
    """Held-out raw scores via stratified k-fold cross-scoring.

    Returns (scores (n, A), labels (n,)) aligned with ``samples``.  Used to
    fit Platt sigmoids without training-score optimism.
    """
    X = [as_vector(v) for v, _ in samples]
    labels = np.asarray([lab for _, lab in samples], dtype=np.int64)
    n = len(samples)
    if n < n_folds:
        raise InsufficientDataError(f"{n} samples cannot fill {n_folds} folds")

    rng = np.random.default_rng((seed, 0xF01D))
    fold_of = np.empty(n, dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        fold_of[idx] = np.arange(idx.size) % n_folds

    scores = np.zeros((n, A))
    for fold in range(n_folds):
        train_idx = np.flatnonzero(fold_of != fold)
        test_idx = np.flatnonzero(fold_of == fold)
        if train_idx.size == 0 or test_idx.size == 0:
            continue
        sub = [(X[i], labels[i]) for i in train_idx]
        sub_model = svm_train(sub, A, C=C, epochs=epochs, seed=seed + fold + 1)
        for i in test_idx:
            scores[i] = svm_scores(sub_model, X[i])
    return scores, labels


def save_model(bundle: ModelBundle, path) -> None:
    doc = {
        "version": 1,
        "A": bundle.svm.A,
        "dim": bundle.svm.dim,
        "class_names": list(bundle.class_names),
        "weights": bundle.svm.weights.tolist(),
        "biases": bundle.svm.biases.tolist(),
        "platt_a": bundle.platt.a.tolist(),
        "platt_b": bundle.platt.b.tolist(),
        "vocab_ref": bundle.vocab_ref,
        "encoder": bundle.encoder,
        "fv_norm": bundle.fv_norm,
    }
    jsonio.dump_file(doc, path)


def load_model(path) -> ModelBundle:
    doc = jsonio.load_file(path)
    try:
        svm = LinearSvmModel(
            weights=np.asarray(doc["weights"], dtype=np.float64),
            biases=np.asarray(doc["biases"], dtype=np.float64),
        )
        platt = PlattParams(
            a=np.asarray(doc["platt_a"], dtype=np.float64),
            b=np.asarray(doc["platt_b"], dtype=np.float64),
        )
        return ModelBundle(
            svm=svm,
            platt=platt,
            class_names=list(doc["class_names"]),
            vocab_ref=doc["vocab_ref"],
            encoder=doc.get("encoder", "fv"),
            fv_norm=bool(doc.get("fv_norm", True)),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing model field {exc}") from exc
