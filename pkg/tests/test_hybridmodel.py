import numpy as np
import pytest

from orbitvqc.ansatz import AnsatzConfig, CircuitParams, encode_batch
from orbitvqc.datasets import Dataset, Sample, TaskDescriptor
from orbitvqc.hybridmodel import (
    AdamState,
    HybridModel,
    TrainConfig,
    adam_step,
    batch_gradient,
    evaluate_accuracy,
    fit,
    mse_cost,
    predict,
    predict_batch,
)
from orbitvqc.neuralnet import DenseLayer, Mlp


def angle_dataset(n_per_class: int = 20, seed: int = 0) -> Dataset:
    """One-qubit states cos t|0> + sin t|1>: +1 for t in [0, 0.3], -1 for t in [1.27, 1.57]."""
    gen = np.random.default_rng(seed)
    samples = [Sample([np.cos(t), np.sin(t)], -1) for t in gen.uniform(1.27, 1.57, n_per_class)]
    samples += [Sample([np.cos(t), np.sin(t)], 1) for t in gen.uniform(0.0, 0.3, n_per_class)]
    return Dataset(samples, TaskDescriptor("toy", "angle"), seed, 1)


def random_amps(batch: int, n: int, rng) -> np.ndarray:
    raw = rng.standard_normal((batch, 2 ** n)) + 1j * rng.standard_normal((batch, 2 ** n))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


class TestMseCost:
    def test_known_values(self):
        assert mse_cost([1.0, -1.0], [1, -1]) == 0.0
        assert mse_cost([0.0, 0.0], [1, -1]) == pytest.approx(1.0)
        assert mse_cost([0.5], [-1]) == pytest.approx(2.25)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            mse_cost([0.0, 0.0], [1])

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            mse_cost([], [])


class TestAdamStep:
    def test_first_step_moves_by_learning_rate(self):
        params, state = adam_step(np.array([1.0, -1.0]), np.array([0.3, -2.0]), AdamState.zeros(2, 0.01))
        np.testing.assert_allclose(params, [0.99, -0.99], atol=1e-6)
        assert state.t == 1

    def test_minimizes_quadratic(self):
        w = np.array([1.0])
        state = AdamState.zeros(1, 0.01)
        values = []
        for _ in range(100):
            w, state = adam_step(w, 2 * w, state)
            values.append(float(w[0] ** 2))
        assert all(b < a for a, b in zip(values, values[1:]))
        assert abs(w[0]) < 0.5

    def test_non_finite_gradient(self):
        with pytest.raises(FloatingPointError, match="Non-finite"):
            adam_step(np.zeros(2), np.array([0.0, np.inf]), AdamState.zeros(2, 0.01))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            adam_step(np.zeros(2), np.zeros(3), AdamState.zeros(2, 0.01))


class TestHybridModel:
    def test_build_is_seeded(self):
        cfg = AnsatzConfig(2, 2)
        a, b = HybridModel.build(cfg, (4,), seed=3), HybridModel.build(cfg, (4,), seed=3)
        np.testing.assert_array_equal(a.flat_params(), b.flat_params())

    def test_parameter_vector_layout(self):
        cfg = AnsatzConfig(2, 2)
        model = HybridModel.build(cfg, (4,), seed=0)
        assert model.n_params == cfg.n_params + model.head.n_params
        flat = model.flat_params()
        np.testing.assert_array_equal(flat[:cfg.n_params], model.qparams.values.ravel())
        model.set_flat_params(flat * 0.5)
        np.testing.assert_allclose(model.flat_params(), flat * 0.5)

    def test_quantum_only_model_has_no_head(self):
        model = HybridModel.build(AnsatzConfig(2, 1), None, seed=0)
        assert model.head is None
        assert model.n_params == 6

    def test_head_width_must_match_circuit(self):
        from orbitvqc.neuralnet import mlp_init
        cfg = AnsatzConfig(2, 1)
        model = HybridModel.build(cfg, (4,), seed=0)
        with pytest.raises(ValueError, match="Head expects"):
            HybridModel(cfg, model.qparams, mlp_init([3, 1], seed=0))


class TestPredict:
    def test_output_range_and_batch_agreement(self, rng):
        model = HybridModel.build(AnsatzConfig(2, 2, pad=(0.0, 0.25)), (8,), seed=1)
        features = rng.uniform(-1, 1, size=(5, 2))
        batch = predict_batch(model, features)
        for row in range(5):
            single = predict(model, features[row])
            assert -1 < single < 1
            assert batch[row] == pytest.approx(single)

    def test_single_unit_head_gives_tanh_of_readout(self):
        cfg = AnsatzConfig(1, 1)
        model = HybridModel(cfg, CircuitParams.zeros(cfg), Mlp([DenseLayer([[1.0]], [0.0])]))
        assert float(predict(model, [1.0, 0.0])) == pytest.approx(np.tanh(1.0), abs=1e-12)
        assert float(predict(model, [0.0, 1.0])) == pytest.approx(np.tanh(-1.0), abs=1e-12)

    def test_zero_head_gives_zero(self, rng):
        cfg = AnsatzConfig(2, 1)
        head = Mlp([DenseLayer(np.zeros((3, 2)), np.zeros(3)), DenseLayer(np.zeros((1, 3)), np.zeros(1))])
        model = HybridModel(cfg, CircuitParams.random(cfg, rng), head)
        assert float(predict(model, rng.standard_normal(4))) == 0.0

    @pytest.mark.parametrize("n", [2, 4])
    def test_matches_dense_matrices(self, rng, dense_readout, n):
        cfg = AnsatzConfig(n, 2)
        model = HybridModel.build(cfg, (5,), seed=n)
        features = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
        readout = dense_readout(cfg, model.qparams.values, features / np.linalg.norm(features))
        hidden, output = model.head.layers
        expected = np.tanh(output.W @ np.tanh(hidden.W @ readout + hidden.b) + output.b)[0]
        assert float(predict(model, features)) == pytest.approx(expected, abs=1e-12)


def zero_head_model(n: int = 2) -> HybridModel:
    cfg = AnsatzConfig(n, 1)
    return HybridModel(cfg, CircuitParams.zeros(cfg), Mlp([DenseLayer(np.zeros((1, n)), np.zeros(1))]))


def random_dataset(labels, rng, n: int = 2) -> Dataset:
    samples = [Sample(row, int(label)) for row, label in zip(random_amps(len(labels), n, rng), labels)]
    return Dataset(samples, TaskDescriptor("toy", "random"), 0, n)


class TestEvaluateAccuracy:
    def test_constant_zero_model_scores_half_on_balanced_data(self, rng):
        assert evaluate_accuracy(zero_head_model(), random_dataset([1, -1] * 10, rng)) == 0.5

    def test_zero_prediction_counts_as_plus(self, rng):
        model = zero_head_model()
        assert evaluate_accuracy(model, random_dataset([1] * 6, rng)) == 1.0
        assert evaluate_accuracy(model, random_dataset([-1] * 6, rng)) == 0.0

    def test_agreeing_and_flipped_labels(self, rng):
        model = HybridModel.build(AnsatzConfig(2, 2), (4,), seed=3)
        amps = random_amps(30, 2, rng)
        preds = predict_batch(model, amps)
        assert np.all(preds != 0)
        signs = np.where(preds > 0, 1, -1)
        agreeing = Dataset([Sample(a, int(s)) for a, s in zip(amps, signs)], TaskDescriptor("toy", "x"), 0, 2)
        flipped = Dataset([Sample(a, int(-s)) for a, s in zip(amps, signs)], TaskDescriptor("toy", "x"), 0, 2)
        assert evaluate_accuracy(model, agreeing) == 1.0
        assert evaluate_accuracy(model, flipped) == 0.0

    def test_invariant_under_reordering(self, rng):
        model = HybridModel.build(AnsatzConfig(2, 2), (4,), seed=5)
        ds = random_dataset(list(rng.choice([-1, 1], size=40)), rng)
        shuffled = ds.subset(rng.permutation(len(ds)))
        assert evaluate_accuracy(model, shuffled) == evaluate_accuracy(model, ds)


def numeric_model_grad(model, amps, labels, eps=1e-6):
    flat = model.flat_params()
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        shifted = flat.copy()
        shifted[i] += eps
        model.set_flat_params(shifted)
        c_plus, _ = batch_gradient(model, amps, labels)
        shifted[i] -= 2 * eps
        model.set_flat_params(shifted)
        c_minus, _ = batch_gradient(model, amps, labels)
        grad[i] = (c_plus - c_minus) / (2 * eps)
    model.set_flat_params(flat)
    return grad


class TestBatchGradient:
    @pytest.mark.parametrize("hidden", [(3,), (), None])
    def test_end_to_end_matches_finite_differences(self, rng, hidden):
        cfg = AnsatzConfig(2, 2)
        for trial in range(5):
            model = HybridModel.build(cfg, hidden, seed=trial)
            amps = random_amps(4, 2, rng)
            labels = np.array([1.0, -1.0, 1.0, -1.0])
            _, grad = batch_gradient(model, amps, labels)
            numeric = numeric_model_grad(model, amps, labels)
            scale = max(1.0, np.max(np.abs(numeric)))
            np.testing.assert_allclose(grad, numeric, rtol=0, atol=1e-4 * scale)

    def test_cost_matches_mse(self, rng):
        model = HybridModel.build(AnsatzConfig(2, 1), (2,), seed=0)
        amps = random_amps(3, 2, rng)
        labels = np.array([1.0, 1.0, -1.0])
        cost, _ = batch_gradient(model, amps, labels)
        preds = [predict(model, a) for a in amps]
        assert cost == pytest.approx(mse_cost(preds, labels))


class TestTrainConfig:
    @pytest.mark.parametrize("lr", [0.0, 1.0, -0.1, 2.0])
    def test_learning_rate_bounds(self, lr):
        with pytest.raises(ValueError, match="Learning rate"):
            TrainConfig(learning_rate=lr).validate()

    def test_batch_larger_than_dataset(self):
        with pytest.raises(ValueError, match="exceeds"):
            TrainConfig(batch_size=64).validate(dataset_size=10)


class TestFit:
    def test_history_starts_at_epoch_zero_and_cost_drops(self):
        ds = angle_dataset()
        model = HybridModel.build(AnsatzConfig(1, 1), (4,), seed=0)
        model, history = fit(model, ds, TrainConfig(epochs=40, batch_size=8, learning_rate=0.05, seed=1))
        assert history[0].epoch == 0
        assert [r.epoch for r in history] == list(range(len(history)))
        assert history[-1].cost < history[0].cost

    def test_quantum_only_learns_separable_task(self):
        ds = angle_dataset()
        model = HybridModel.build(AnsatzConfig(1, 1), None, seed=2)
        model, history = fit(model, ds, TrainConfig(epochs=100, batch_size=8, learning_rate=0.05,
                                                    seed=3, hidden=None))
        assert evaluate_accuracy(model, ds) >= 0.9
        assert history[-1].train_accuracy == pytest.approx(evaluate_accuracy(model, ds))

    def test_single_sample_is_memorized(self):
        ds = Dataset([Sample([0.6, 0.8], -1)], TaskDescriptor("toy", "one"), 0, 1)
        model = HybridModel.build(AnsatzConfig(1, 1), (8,), seed=4)
        model, history = fit(model, ds, TrainConfig(epochs=400, batch_size=1, learning_rate=0.05,
                                                    seed=0, early_stop=False))
        assert history[-1].cost < 0.01
        assert predict(model, [0.6, 0.8]) < 0

    def test_deterministic(self):
        ds = angle_dataset(seed=5)
        cfg = TrainConfig(epochs=5, batch_size=4, learning_rate=0.01, seed=9)
        _, first = fit(HybridModel.build(AnsatzConfig(1, 2), (3,), seed=1), ds, cfg)
        _, second = fit(HybridModel.build(AnsatzConfig(1, 2), (3,), seed=1), ds, cfg)
        assert first == second

    def test_dataset_width_must_match(self):
        model = HybridModel.build(AnsatzConfig(2, 1), (2,), seed=0)
        with pytest.raises(ValueError, match="qubits"):
            fit(model, angle_dataset(), TrainConfig(epochs=1, batch_size=4))

    def test_invalid_learning_rate(self):
        model = HybridModel.build(AnsatzConfig(1, 1), (2,), seed=0)
        with pytest.raises(ValueError):
            fit(model, angle_dataset(), TrainConfig(epochs=1, batch_size=4, learning_rate=1.5))

    def test_encoding_uses_model_padding(self):
        model = HybridModel.build(AnsatzConfig(2, 1, pad=(0.0, 0.25)), (2,), seed=0)
        features = np.array([[0.0, 0.0]])
        np.testing.assert_allclose(encode_batch(features, 2, model.cfg.pad)[0], [0, 0, 0, 1])
