"""scikit-learn style front door for the LSTM regressor.

Wraps the functional core so the model composes with pipelines, cloning, and
grid search: constructor params mirror ``TrainConfig``, ``fit`` trains from a
fresh seeded init, ``predict`` runs the stateless forward pass.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DimensionError, ValidationError
from .lstm import (
    FeatureMatrix,
    TargetMatrix,
    TrainConfig,
    forward,
    init_model,
    train,
)


def check_sequence_matrix(x, name: str = "X") -> np.ndarray:
    """Validate one sequence block: 2-D, finite, float64."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D (rows=variables, cols=steps), got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _as_pairs(X, y) -> list[tuple[np.ndarray, np.ndarray]]:
    # a single sequence is anything that converts to one 2-D block; a dataset
    # is a list of blocks (possibly with different step counts)
    try:
        single = np.asarray(X, dtype=np.float64).ndim == 2
    except (ValueError, TypeError):
        single = False
    if single:
        return [(check_sequence_matrix(X, "X"), check_sequence_matrix(y, "y"))]
    xs = list(X)
    ys = list(y)
    if len(xs) != len(ys):
        raise ValidationError(f"{len(xs)} feature blocks for {len(ys)} target blocks")
    if not xs:
        raise ValidationError("empty training set")
    return [
        (check_sequence_matrix(xi, f"X[{i}]"), check_sequence_matrix(yi, f"y[{i}]"))
        for i, (xi, yi) in enumerate(zip(xs, ys))
    ]


class LstmRegressor(BaseEstimator):
    """Sequence-to-sequence regressor with the fit/predict estimator API.

    X is (n_sources, n_steps) or a list of such blocks; y is (n_out, n_steps)
    per block. Training is full-batch gradient descent, deterministic for a
    fixed ``seed``.
    """

    def __init__(
        self,
        n_hidden: int = 8,
        learning_rate: float = 0.05,
        epochs: int = 500,
        gradient_clip: float | None = None,
        seed: int = 0,
    ):
        self.n_hidden = n_hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.gradient_clip = gradient_clip
        self.seed = seed

    def fit(self, X, y):
        pairs = _as_pairs(X, y)
        n_in = pairs[0][0].shape[0]
        n_out = pairs[0][1].shape[0]
        dataset = []
        for xi, yi in pairs:
            if xi.shape[0] != n_in or yi.shape[0] != n_out:
                raise DimensionError("all blocks must share the same source/output row counts")
            if yi.shape[1] != xi.shape[1]:
                raise DimensionError(
                    f"target has {yi.shape[1]} steps, features have {xi.shape[1]}"
                )
            labels = tuple(f"x{k}" for k in range(n_in))
            dataset.append((FeatureMatrix(data=xi, source_labels=labels), TargetMatrix(data=yi)))

        cfg = TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            gradient_clip=self.gradient_clip,
            seed=self.seed,
        )
        model = init_model(n_in=n_in, n_hidden=self.n_hidden, n_out=n_out, seed=self.seed)
        self.model_, record = train(model, dataset, cfg)
        self.loss_history_ = np.asarray(record.losses)
        self.n_features_in_ = n_in
        self.n_outputs_ = n_out
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError("LstmRegressor is not fitted; call fit first")

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        arr = check_sequence_matrix(X, "X")
        labels = tuple(f"x{k}" for k in range(arr.shape[0]))
        y = forward(self.model_, FeatureMatrix(data=arr, source_labels=labels))
        return y.data

    def score(self, X, y) -> float:
        """R^2 over all flattened output entries (1.0 is a perfect fit)."""
        self._check_fitted()
        y_true = check_sequence_matrix(y, "y").reshape(-1)
        y_pred = self.predict(X).reshape(-1)
        if y_true.size != y_pred.size:
            raise DimensionError(f"{y_true.size} targets vs {y_pred.size} predictions")
        ss_res = float(np.sum((y_true - y_pred) ** 2))
        ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
        if ss_tot == 0.0:
            return 0.0 if ss_res > 0 else 1.0
        return 1.0 - ss_res / ss_tot
