import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from airrisk.errors import DimensionError, ValidationError
from airrisk.estimator import LstmRegressor, check_sequence_matrix
from airrisk.lstm import (
    FeatureMatrix,
    TargetMatrix,
    TrainConfig,
    forward,
    init_model,
    train,
)


def toy_task(seed=0, m=20):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(2, m))
    y = (0.5 * x[0] + 0.1)[None, :]
    return x, y


class TestEstimatorApi:
    def test_get_params_round_trip(self):
        est = LstmRegressor(n_hidden=5, learning_rate=0.01, epochs=10, seed=3)
        params = est.get_params()
        assert params["n_hidden"] == 5
        assert params["learning_rate"] == 0.01
        cloned = clone(est)
        assert cloned.get_params() == params

    def test_set_params(self):
        est = LstmRegressor().set_params(n_hidden=2, epochs=7)
        assert est.n_hidden == 2 and est.epochs == 7

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            LstmRegressor().predict(np.zeros((2, 3)))

    def test_fit_matches_functional_core(self):
        x, y = toy_task(seed=1)
        est = LstmRegressor(n_hidden=4, learning_rate=0.05, epochs=25, seed=11).fit(x, y)

        labels = tuple(f"x{k}" for k in range(2))
        dataset = [(FeatureMatrix(data=x, source_labels=labels), TargetMatrix(data=y))]
        model = init_model(2, 4, 1, seed=11)
        trained, record = train(
            model, dataset, TrainConfig(learning_rate=0.05, epochs=25, seed=11)
        )
        assert np.array_equal(est.loss_history_, np.asarray(record.losses))
        assert np.array_equal(
            est.predict(x), forward(trained, dataset[0][0]).data
        )

    def test_fit_accepts_sequence_lists(self):
        xa, ya = toy_task(seed=2, m=12)
        xb, yb = toy_task(seed=3, m=15)
        est = LstmRegressor(n_hidden=3, epochs=5, seed=0).fit([xa, xb], [ya, yb])
        assert est.n_features_in_ == 2
        assert est.predict(xb).shape == (1, 15)

    def test_loss_history_exposed(self):
        x, y = toy_task(seed=4)
        est = LstmRegressor(n_hidden=3, epochs=8, seed=1).fit(x, y)
        assert est.loss_history_.shape == (8,)
        assert est.loss_history_[-1] <= est.loss_history_[0]

    def test_score_improves_with_training(self):
        x, y = toy_task(seed=5, m=30)
        short = LstmRegressor(n_hidden=6, learning_rate=0.08, epochs=1, seed=2).fit(x, y)
        long = LstmRegressor(n_hidden=6, learning_rate=0.08, epochs=400, seed=2).fit(x, y)
        assert long.score(x, y) > short.score(x, y)
        assert long.score(x, y) <= 1.0

    def test_mismatched_blocks_rejected(self):
        x, y = toy_task()
        with pytest.raises(ValidationError):
            LstmRegressor().fit([x], [y, y])

    def test_step_mismatch_rejected(self):
        x, _ = toy_task(m=10)
        with pytest.raises(DimensionError):
            LstmRegressor(epochs=1).fit(x, np.zeros((1, 9)))


class TestValidationHelpers:
    def test_check_sequence_matrix_happy(self):
        out = check_sequence_matrix([[1, 2], [3, 4]])
        assert out.dtype == np.float64

    def test_rejects_non_2d(self):
        with pytest.raises(ValidationError):
            check_sequence_matrix([1.0, 2.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            check_sequence_matrix([[np.inf, 1.0]])
