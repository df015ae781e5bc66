"""MLP classifier: shapes, gradients, convergence, dropout, divergence."""

import numpy as np
import pytest
from helpers import (
    PARAM_NAMES,
    analytic_gradients_via_step,
    make_blobs,
    numeric_gradients,
    relative_error,
)

from ldprepr.errors import DivergenceError, ParameterError, ShapeError
from ldprepr.ldp import RngSeed
from ldprepr.model import (
    MlpClassifier,
    MlpConfig,
    apply_input_dropout,
    evaluate,
    forward,
    init_mlp,
    train,
)


def small_config(**overrides):
    defaults = dict(
        input_dim=20, hidden_units=16, num_classes=2, dropout_rate=0.0,
        learning_rate=0.05, decay=0.0, momentum=0.9, batch_size=32, epochs=30,
    )
    defaults.update(overrides)
    return MlpConfig(**defaults)


class TestInit:
    def test_shapes(self):
        config = MlpConfig(input_dim=500, hidden_units=128, num_classes=2)
        model = init_mlp(config, RngSeed(0))
        assert model.w1.shape == (500, 128)
        assert model.b1.shape == (128,)
        assert model.w2.shape == (128, 2)
        assert model.b2.shape == (2,)
        np.testing.assert_array_equal(model.b1, 0.0)
        np.testing.assert_array_equal(model.b2, 0.0)

    def test_same_seed_same_weights(self):
        config = small_config()
        a = init_mlp(config, RngSeed(5))
        b = init_mlp(config, RngSeed(5))
        np.testing.assert_array_equal(a.w1, b.w1)
        np.testing.assert_array_equal(a.w2, b.w2)

    def test_different_seeds_differ(self):
        config = small_config()
        a = init_mlp(config, RngSeed(5))
        b = init_mlp(config, RngSeed(6))
        assert not np.array_equal(a.w1, b.w1)

    def test_fan_scaled_bounds(self):
        config = MlpConfig(input_dim=50, hidden_units=30, num_classes=4)
        model = init_mlp(config, RngSeed(1))
        assert np.abs(model.w1).max() <= np.sqrt(6.0 / 80)
        assert np.abs(model.w2).max() <= np.sqrt(6.0 / 34)

    def test_validates_config(self):
        with pytest.raises(ParameterError):
            MlpConfig(input_dim=0)
        with pytest.raises(ParameterError):
            MlpConfig(input_dim=4, dropout_rate=1.0)
        with pytest.raises(ParameterError):
            MlpConfig(input_dim=4, learning_rate=0.0)


class TestForward:
    def test_zero_weights_give_uniform_probabilities(self):
        config = small_config(num_classes=5)
        model = init_mlp(config, RngSeed(0))
        model.w1[:] = 0.0
        model.w2[:] = 0.0
        probs = forward(model, np.random.default_rng(0).normal(size=(7, 20)))
        np.testing.assert_allclose(probs, 0.2, atol=1e-12)

    def test_rows_sum_to_one(self):
        config = small_config(num_classes=3)
        model = init_mlp(config, RngSeed(2))
        X = np.random.default_rng(3).normal(0, 10, size=(50, 20))
        probs = forward(model, X)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)

    def test_no_dropout_makes_train_mode_irrelevant(self):
        config = small_config(dropout_rate=0.0)
        model = init_mlp(config, RngSeed(4))
        X = np.random.default_rng(5).normal(size=(10, 20))
        np.testing.assert_array_equal(
            forward(model, X, train_mode=True, rng=RngSeed(0)),
            forward(model, X, train_mode=False),
        )

    def test_dropout_needs_rng(self):
        config = small_config(dropout_rate=0.5)
        model = init_mlp(config, RngSeed(4))
        with pytest.raises(ParameterError):
            forward(model, np.zeros((2, 20)), train_mode=True)

    def test_rejects_width_mismatch(self):
        model = init_mlp(small_config(), RngSeed(0))
        with pytest.raises(ShapeError):
            forward(model, np.zeros((3, 7)))


class TestGradients:
    def test_single_step_matches_finite_differences(self):
        gen = np.random.default_rng(7)
        config = small_config(input_dim=6, hidden_units=5, num_classes=3)
        X = gen.normal(size=(12, 6))
        y = gen.integers(0, 3, size=12)
        reference, analytic = analytic_gradients_via_step(config, X, y, seed=11)
        numeric = numeric_gradients(reference, X, y)
        for name in PARAM_NAMES:
            assert relative_error(analytic[name], numeric[name]) <= 1e-4

    def test_many_random_configurations(self):
        gen = np.random.default_rng(100)
        for trial in range(8):
            dim = int(gen.integers(3, 9))
            hidden = int(gen.integers(2, 7))
            classes = int(gen.integers(2, 5))
            n = int(gen.integers(3, 10))
            config = small_config(input_dim=dim, hidden_units=hidden,
                                  num_classes=classes)
            X = gen.normal(size=(n, dim))
            y = gen.integers(0, classes, size=n)
            reference, analytic = analytic_gradients_via_step(
                config, X, y, seed=trial
            )
            numeric = numeric_gradients(reference, X, y)
            for name in PARAM_NAMES:
                assert relative_error(analytic[name], numeric[name]) <= 1e-4


class TestTrain:
    def test_separable_blobs_reach_high_accuracy(self):
        X, y = make_blobs(n=200, dim=20, separation=4.0, seed=1)
        config = small_config()
        model = init_mlp(config, RngSeed(2))
        model, history = train(model, X, y, seed=RngSeed(3))
        assert history.accuracy[-1] >= 0.95
        assert len(history.loss) == config.epochs

    def test_loss_drops_between_first_and_last_epochs(self):
        X, y = make_blobs(n=200, dim=20, separation=3.0, seed=4)
        model = init_mlp(small_config(epochs=12), RngSeed(5))
        _, history = train(model, X, y, seed=RngSeed(6))
        assert np.mean(history.loss[-5:]) < np.mean(history.loss[:5])

    def test_zero_epochs_is_identity(self):
        config = small_config(epochs=0)
        model = init_mlp(config, RngSeed(7))
        w1_before = model.w1.copy()
        model, history = train(model, np.zeros((4, 20)), np.zeros(4, dtype=int),
                               seed=RngSeed(8))
        np.testing.assert_array_equal(model.w1, w1_before)
        assert history.loss == [] and history.accuracy == []

    def test_deterministic_given_seeds(self):
        X, y = make_blobs(n=100, dim=20, seed=9)
        runs = []
        for _ in range(2):
            model = init_mlp(small_config(epochs=5, dropout_rate=0.5), RngSeed(10))
            model, _ = train(model, X, y, seed=RngSeed(11))
            runs.append(model.w1.copy())
        np.testing.assert_array_equal(runs[0], runs[1])

    def test_rejects_empty_data(self):
        model = init_mlp(small_config(), RngSeed(0))
        with pytest.raises(ParameterError):
            train(model, np.zeros((0, 20)), np.zeros(0, dtype=int))

    def test_rejects_out_of_range_labels(self):
        model = init_mlp(small_config(num_classes=2), RngSeed(0))
        with pytest.raises(ParameterError):
            train(model, np.zeros((3, 20)), np.array([0, 1, 2]))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_raises(self):
        X, y = make_blobs(n=64, dim=20, seed=12)
        config = small_config(learning_rate=1e200, epochs=3, momentum=0.0)
        model = init_mlp(config, RngSeed(13))
        with pytest.raises(DivergenceError):
            train(model, X, y, seed=RngSeed(14))

    def test_learning_rate_decays_with_steps(self):
        # With a huge decay the second update must be much smaller than the
        # first; compare single-epoch deltas on identical data.
        X, y = make_blobs(n=32, dim=20, seed=15)
        config = small_config(batch_size=32, momentum=0.0, decay=100.0, epochs=1)
        model = init_mlp(config, RngSeed(16))
        w_start = model.w1.copy()
        train(model, X, y, config, seed=RngSeed(17))
        first_delta = np.linalg.norm(model.w1 - w_start)
        w_mid = model.w1.copy()
        train(model, X, y, config, seed=RngSeed(17))
        second_delta = np.linalg.norm(model.w1 - w_mid)
        assert second_delta < first_delta / 10


class TestEvaluate:
    def test_untrained_binary_accuracy_is_chance(self):
        gen = np.random.default_rng(20)
        model = init_mlp(small_config(), RngSeed(21))
        X = gen.normal(size=(2000, 20))
        y = np.arange(2000) % 2
        assert abs(evaluate(model, X, y) - 0.5) <= 0.05

    def test_untrained_seven_class_accuracy_is_chance(self):
        gen = np.random.default_rng(22)
        model = init_mlp(small_config(num_classes=7), RngSeed(23))
        X = gen.normal(size=(2100, 20))
        y = np.arange(2100) % 7
        assert abs(evaluate(model, X, y) - 1.0 / 7.0) <= 0.05

    def test_memorizes_tiny_dataset(self):
        gen = np.random.default_rng(24)
        X = gen.normal(size=(10, 20))
        y = gen.integers(0, 2, size=10)
        config = small_config(epochs=300, batch_size=10, learning_rate=0.1)
        model = init_mlp(config, RngSeed(25))
        model, _ = train(model, X, y, seed=RngSeed(26))
        assert evaluate(model, X, y) == 1.0

    def test_rejects_empty_data(self):
        model = init_mlp(small_config(), RngSeed(0))
        with pytest.raises(ParameterError):
            evaluate(model, np.zeros((0, 20)), np.zeros(0, dtype=int))


class TestDropoutScaling:
    def test_inverted_dropout_preserves_expectation(self):
        gen = np.random.default_rng(30)
        x = gen.normal(size=(1, 40))
        rate = 0.5
        masks = 20_000
        total = np.zeros_like(x)
        for _ in range(masks):
            total += apply_input_dropout(x, rate, gen)
        mean = total / masks
        sigma = np.abs(x) * np.sqrt(rate / (1 - rate)) / np.sqrt(masks)
        assert np.all(np.abs(mean - x) <= 3 * sigma + 1e-12)

    def test_dropout_zeroes_expected_fraction(self):
        gen = np.random.default_rng(31)
        x = np.ones((100, 100))
        dropped = apply_input_dropout(x, 0.3, gen)
        zero_fraction = np.mean(dropped == 0.0)
        assert abs(zero_fraction - 0.3) <= 0.02


class TestMlpClassifier:
    def test_fit_predict_score(self):
        X, y = make_blobs(n=160, dim=12, separation=5.0, seed=40)
        clf = MlpClassifier(hidden_units=16, dropout_rate=0.0, epochs=25,
                            learning_rate=0.05, seed=1)
        clf.fit(X, y)
        assert clf.score(X, y) >= 0.95
        assert clf.predict_proba(X).shape == (160, 2)

    def test_maps_non_contiguous_labels(self):
        X, y = make_blobs(n=120, dim=10, separation=5.0, seed=41)
        labels = np.where(y == 0, 3, 9)
        clf = MlpClassifier(hidden_units=8, dropout_rate=0.0, epochs=20,
                            learning_rate=0.05, seed=2).fit(X, labels)
        np.testing.assert_array_equal(clf.classes_, [3, 9])
        assert set(np.unique(clf.predict(X))) <= {3, 9}

    def test_get_params_round_trip(self):
        clf = MlpClassifier(hidden_units=64, epochs=5, seed=7)
        params = clf.get_params()
        assert params["hidden_units"] == 64
        assert MlpClassifier(**params).get_params() == params
