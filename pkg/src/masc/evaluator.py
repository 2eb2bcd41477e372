"""Logistic-regression evaluator for augmentation strategies."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from masc.data_model import Dataset, ScaleStats, group_cardinalities
from masc.fairness import FairnessReport, prediction_report


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.1
    max_epochs: int = 2000
    tolerance: float = 1e-6
    seed: int = 0


@dataclass(frozen=True)
class TrainedModel:
    weights: np.ndarray  # bias last
    training_config: TrainingConfig
    converged: bool = False
    n_epochs: int = 0
    loss_history: tuple[float, ...] = field(default=(), repr=False)

    def decision(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights[:-1] + self.weights[-1]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (self.decision(x) > 0).astype(np.int64)


def _sigmoid(t: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -t))


def _augment_bias(x: np.ndarray) -> np.ndarray:
    return np.hstack([x, np.ones((len(x), 1))])


def logistic_loss(w: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood; ``x`` already carries the bias column."""
    t = x @ w
    # log(1 + e^t) - y t, evaluated stably
    return float(np.mean(np.logaddexp(0.0, t) - y * t))


def logistic_grad(w: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x.T @ (_sigmoid(x @ w) - y) / len(y)


def train_lr(train: Dataset | tuple[np.ndarray, np.ndarray], config: TrainingConfig | None = None) -> TrainedModel:
    """Full-batch gradient descent on the mean logistic loss.

    Features are used as given (the protected attribute is never among them).
    Stops after ``max_epochs`` or once the gradient norm drops below
    ``tolerance``. Weights start at zero, so the result is deterministic.
    """
    config = config or TrainingConfig()
    if isinstance(train, Dataset):
        x, y = train.features, train.targets
    else:
        x, y = train
    x = _augment_bias(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) < 2:
        raise ValueError("need at least 2 training rows")
    if np.unique(y).size < 2:
        raise ValueError("training set has a single class")

    w = np.zeros(x.shape[1])
    losses = [logistic_loss(w, x, y)]
    converged = False
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        g = logistic_grad(w, x, y)
        if np.linalg.norm(g) < config.tolerance:
            converged = True
            epoch -= 1
            break
        w = w - config.learning_rate * g
        losses.append(logistic_loss(w, x, y))
    else:
        converged = bool(np.linalg.norm(logistic_grad(w, x, y)) < config.tolerance)
    if not np.isfinite(w).all():
        raise FloatingPointError("gradient descent diverged")
    return TrainedModel(w, config, converged, epoch, tuple(losses))


def stratified_split(ds: Dataset, test_fraction: float = 0.3, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Row indices (train, test) stratified by (group, target).

    Each stratum contributes ``max(1, round(test_fraction * size))`` test rows
    and keeps at least one training row.
    """
    rng = np.random.default_rng(seed)
    train, test = [], []
    for g in range(ds.schema.n_groups):
        for label in (0, 1):
            idx = np.flatnonzero((ds.group_labels == g) & (ds.targets == label))
            if len(idx) == 0:
                continue
            if len(idx) < 2:
                group = ds.schema.protected_groups[g]
                raise ValueError(f"stratum (group={group!r}, target={label}) has 1 row; too small to split")
            n_test = min(len(idx) - 1, max(1, int(round(test_fraction * len(idx)))))
            perm = rng.permutation(idx)
            test.append(perm[:n_test])
            train.append(perm[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


Augmenter = Callable[[Dataset], Dataset]


def evaluate_method(
    original: Dataset,
    augmenter: Augmenter | None,
    split_seed: int = 0,
    method: str = "none",
    config: TrainingConfig | None = None,
    majority: int | None = None,
) -> FairnessReport:
    """Train on the augmented training split, test on held-out original rows.

    The original dataset is split 70/30 first; ``augmenter`` is applied to the
    training split only, so neither borrowed nor synthetic rows are derived
    from test rows. Features are standardised with training statistics.
    """
    train_idx, test_idx = stratified_split(original, 0.3, split_seed)
    train = original.take(train_idx)
    test = original.take(test_idx)
    augmented = augmenter(train) if augmenter is not None else train
    if augmented.schema != original.schema:
        raise ValueError("augmented dataset does not share the original schema")
    _audit_no_test_rows(augmented, test)

    stats = ScaleStats.fit(augmented.features)
    model = train_lr((stats.apply(augmented.features), augmented.targets), config)
    y_pred = model.predict(stats.apply(test.features))
    if majority is None:
        majority = int(np.argmax(group_cardinalities(original)))
    report = prediction_report(
        original.id, method, test.targets, y_pred, test.group_labels, original.schema.n_groups, majority
    )
    report.extra.update(
        n_train=augmented.n,
        n_test=test.n,
        converged=model.converged,
        epochs=model.n_epochs,
        training_config=asdict(model.training_config),
    )
    return report


def _audit_no_test_rows(train: Dataset, test: Dataset) -> None:
    test_keys = set(zip(test.source_ids.tolist(), test.source_rows.tolist()))
    real = train.source_rows >= 0
    leaked = test_keys.intersection(zip(train.source_ids[real].tolist(), train.source_rows[real].tolist()))
    if leaked:
        raise AssertionError(f"{len(leaked)} test rows appear in the training set")
