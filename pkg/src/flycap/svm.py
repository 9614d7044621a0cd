"""One-vs-rest linear SVM trained by projected stochastic subgradient.

Each class gets a binary hinge-loss model with L2 regularization on the
augmented weight vector [w; b], updated with the classic 1/(lambda * t)
step size and projected onto the ball of radius 1/sqrt(lambda). The
returned model is the running average of the iterates, which is far
more stable than the last iterate at practical epoch counts. All class
models share the seed-derived visit order, so they can be updated
together in one vectorized pass while remaining independent problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import FeatureDataset
from .reporting import atomic_write_text
from .seeding import check_seed, derive_rng


@dataclass(frozen=True)
class TrainSpec:
    lambda_: float = 1e-4
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.lambda_ <= 0.0:
            raise ValueError(f"lambda_ must be positive, got {self.lambda_}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        check_seed(self.seed)


@dataclass(eq=False)
class SvmModel:
    """weights has one row per class; the last column is the bias."""

    weights: np.ndarray
    num_classes: int
    dim: int
    lambda_: float
    epochs: int
    seed: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.num_classes, self.dim + 1):
            raise ValueError(
                f"weights shape {self.weights.shape} inconsistent with "
                f"{self.num_classes} classes and dim {self.dim}"
            )
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")


def _canonical_order(d: FeatureDataset) -> np.ndarray:
    """Sort samples by feature values (then label) so that training is
    invariant to the order rows arrived in."""
    keys = (d.labels,) + tuple(d.features[:, ::-1].T)
    return np.lexsort(keys)


def train(d: FeatureDataset, spec: TrainSpec) -> SvmModel:
    """Fit one binary model per class over seed-shuffled epochs.

    The visit order is a pure function of the seed and the canonical
    sample order, never of the input row order, so permuting the
    dataset's rows leaves the trained model bit-identical.
    """
    if d.n_samples == 0:
        raise ValueError("cannot train on an empty dataset")
    num_classes = d.num_classes
    if np.unique(d.labels).size < 2:
        raise ValueError("training requires at least two classes with samples")
    counts = np.bincount(d.labels, minlength=num_classes)
    if np.any(counts == 0):
        empty = int(np.flatnonzero(counts == 0)[0])
        raise ValueError(f"class {empty} has no samples")

    order = _canonical_order(d)
    x = np.hstack([d.features[order], np.ones((d.n_samples, 1))])
    labels = d.labels[order]
    # targets[c, i] = +1 if sample i belongs to class c else -1
    targets = np.where(labels[None, :] == np.arange(num_classes)[:, None], 1.0, -1.0)

    lam = spec.lambda_
    radius = 1.0 / math.sqrt(lam)
    weights = np.zeros((num_classes, d.dim + 1))
    averaged = np.zeros_like(weights)
    rng = derive_rng(spec.seed)
    t = 0
    for _ in range(spec.epochs):
        for i in rng.permutation(d.n_samples):
            t += 1
            eta = 1.0 / (lam * t)
            xi = x[i]
            # fixed-order reduction keeps scores thread-independent
            scores = (weights * xi).sum(axis=1)
            active = targets[:, i] * scores < 1.0
            weights *= 1.0 - eta * lam
            if np.any(active):
                weights[active] += (eta * targets[active, i])[:, None] * xi
            norms = np.sqrt((weights * weights).sum(axis=1))
            over = norms > radius
            if np.any(over):
                weights[over] *= radius / norms[over][:, None]
            averaged += (weights - averaged) / t
    return SvmModel(
        weights=averaged,
        num_classes=num_classes,
        dim=d.dim,
        lambda_=lam,
        epochs=spec.epochs,
        seed=spec.seed,
    )


def decision_scores(model: SvmModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    if single:
        features = features[None, :]
    if features.shape[1] != model.dim:
        raise ValueError(
            f"feature dim {features.shape[1]} does not match model dim {model.dim}"
        )
    scores = features @ model.weights[:, :-1].T + model.weights[:, -1]
    return scores[0] if single else scores


def predict(model: SvmModel, x: np.ndarray) -> int:
    """Class with the highest score; ties go to the lowest class id."""
    return int(np.argmax(decision_scores(model, x)))


def predict_batch(model: SvmModel, features: np.ndarray) -> np.ndarray:
    return np.argmax(decision_scores(model, features), axis=1)


def evaluate(model: SvmModel, d: FeatureDataset) -> float:
    """Fraction of correct predictions on a dataset."""
    if d.n_samples == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return float(np.mean(predict_batch(model, d.features) == d.labels))


def objective(model: SvmModel, d: FeatureDataset) -> float:
    """Summed per-class regularized hinge objective on a dataset."""
    x = np.hstack([d.features, np.ones((d.n_samples, 1))])
    targets = np.where(
        d.labels[None, :] == np.arange(model.num_classes)[:, None], 1.0, -1.0
    )
    scores = model.weights @ x.T
    hinge = np.maximum(0.0, 1.0 - targets * scores).mean(axis=1)
    reg = 0.5 * model.lambda_ * (model.weights**2).sum(axis=1)
    return float((hinge + reg).sum())


def save_model(model: SvmModel, path, invocation: str | None = None) -> None:
    """Text form: one dimensions line, then one weight row per line."""
    lines = [
        f"{model.num_classes} {model.dim} {model.lambda_!r} {model.epochs} {model.seed}"
    ]
    for row in model.weights:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n", invocation)


def load_model(path) -> SvmModel:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError(f"{path}: malformed model header")
    num_classes, dim = int(head[0]), int(head[1])
    lambda_, epochs, seed = float(head[2]), int(head[3]), int(head[4])
    rows = [np.array([float(v) for v in ln.split()]) for ln in lines[1:]]
    if len(rows) != num_classes:
        raise ValueError(f"{path}: expected {num_classes} weight rows, got {len(rows)}")
    return SvmModel(
        weights=np.vstack(rows),
        num_classes=num_classes,
        dim=dim,
        lambda_=lambda_,
        epochs=epochs,
        seed=seed,
    )
