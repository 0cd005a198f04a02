import numpy as np
import pytest

from orbitvqc.ansatz import (
    AnsatzConfig,
    CircuitParams,
    amplitude_encode,
    circuit_forward,
    circuit_forward_batch,
    circuit_gradient,
    encode_batch,
)
from orbitvqc.statevec import StateVector


def random_state(n: int, rng) -> StateVector:
    return StateVector.from_amplitudes(rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n))


class TestAmplitudeEncode:
    def test_equal_features_give_plus(self):
        state = amplitude_encode([1, 1], 1)
        np.testing.assert_allclose(state.amps, StateVector.plus(1).amps)

    def test_short_vector_is_zero_padded(self):
        state = amplitude_encode([0, 2], 2)
        np.testing.assert_allclose(state.amps, [0, 1, 0, 0])

    def test_free_amplitudes_follow_features(self):
        state = amplitude_encode([0.0, 0.0], 2, pad=(0.0, 0.25))
        np.testing.assert_allclose(state.amps, [0, 0, 0, 1])

    def test_too_many_features(self):
        with pytest.raises(ValueError, match="do not fit"):
            amplitude_encode(np.ones(5), 2)

    def test_zero_vector(self):
        with pytest.raises(ValueError, match="zero-norm"):
            amplitude_encode([0, 0], 1)

    def test_batch_matches_single(self, rng):
        features = rng.standard_normal((4, 2))
        batch = encode_batch(features, 2, pad=(0.0, 0.25))
        for row in range(4):
            np.testing.assert_allclose(batch[row], amplitude_encode(features[row], 2, (0.0, 0.25)).amps)


class TestAnsatzConfig:
    def test_single_qubit_has_no_entangler(self):
        assert AnsatzConfig(1, 2).entangling_gates() == []

    def test_two_qubits_use_one_gate(self):
        gates = AnsatzConfig(2, 1).entangling_gates()
        assert [(g.kind, g.qubit_a, g.qubit_b) for g in gates] == [("CNOT", 1, 2)]

    def test_ring_closes_on_three_or_more(self):
        gates = AnsatzConfig(4, 1).entangling_gates()
        assert [(g.qubit_a, g.qubit_b) for g in gates] == [(1, 2), (2, 3), (3, 4), (4, 1)]

    def test_linear_and_cz_variants(self):
        assert len(AnsatzConfig(3, 1, "linear-cnot").entangling_gates()) == 2
        assert {g.kind for g in AnsatzConfig(3, 1, "ring-cz").entangling_gates()} == {"CZ"}

    def test_validation(self):
        with pytest.raises(ValueError):
            AnsatzConfig(0, 1)
        with pytest.raises(ValueError):
            AnsatzConfig(2, 0)
        with pytest.raises(ValueError, match="Unknown entangler"):
            AnsatzConfig(2, 1, "all-to-all")

    def test_param_count(self):
        assert AnsatzConfig(4, 4).n_params == 48


class TestCircuitParams:
    def test_shape_checked(self):
        with pytest.raises(ValueError):
            CircuitParams(np.zeros((2, 3)))
        with pytest.raises(ValueError, match="does not match"):
            CircuitParams(np.zeros((1, 2, 3))).check_against(AnsatzConfig(3, 1))

    def test_non_finite_rejected(self):
        values = np.zeros((1, 1, 3))
        values[0, 0, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            CircuitParams(values)

    def test_random_angles_in_range(self, rng):
        params = CircuitParams.random(AnsatzConfig(3, 2), rng)
        assert params.values.shape == (2, 3, 3)
        assert np.all((params.values >= -np.pi) & (params.values < np.pi))

    def test_random_angles_respect_scale(self, rng):
        params = CircuitParams.random(AnsatzConfig(4, 2), rng, scale=np.pi / 4)
        assert np.all(np.abs(params.values) <= np.pi / 4)
        assert np.max(np.abs(params.values)) > np.pi / 8

    @pytest.mark.parametrize("scale", [0.0, -1.0, 4.0])
    def test_invalid_scale(self, rng, scale):
        with pytest.raises(ValueError, match="scale"):
            CircuitParams.random(AnsatzConfig(2, 1), rng, scale=scale)


class TestCircuitForward:
    def test_zero_angles_on_ground_state(self):
        cfg = AnsatzConfig(3, 2)
        np.testing.assert_allclose(circuit_forward(cfg, CircuitParams.zeros(cfg), StateVector.zero(3)), [1, 1, 1])

    def test_single_qubit_closed_form(self, rng):
        cfg = AnsatzConfig(1, 1)
        for _ in range(10):
            alpha, beta, gamma = rng.uniform(0, 2 * np.pi, size=3)
            params = CircuitParams(np.array([[[alpha, beta, gamma]]]))
            out = circuit_forward(cfg, params, StateVector.zero(1))
            assert out[0] == pytest.approx(np.cos(alpha) * np.cos(beta), abs=1e-12)

    def test_readout_bounded(self, rng):
        cfg = AnsatzConfig(3, 3)
        params = CircuitParams.random(cfg, rng)
        out = circuit_forward(cfg, params, random_state(3, rng))
        assert out.shape == (3,)
        assert np.all(np.abs(out) <= 1 + 1e-12)

    def test_entangler_acts_after_rotations(self):
        # RY(pi) on qubit 1 gives |10>, the closing CNOT then gives |11>
        cfg = AnsatzConfig(2, 1)
        values = np.zeros((1, 2, 3))
        values[0, 0, 1] = np.pi
        out = circuit_forward(cfg, CircuitParams(values), StateVector.zero(2))
        np.testing.assert_allclose(out, [-1, -1], atol=1e-12)

    def test_qubit_count_mismatch(self):
        cfg = AnsatzConfig(2, 1)
        with pytest.raises(ValueError, match="qubits"):
            circuit_forward(cfg, CircuitParams.zeros(cfg), StateVector.zero(3))

    def test_two_pi_periodic(self, rng):
        cfg = AnsatzConfig(3, 2)
        params = CircuitParams.random(cfg, rng)
        state = random_state(3, rng)
        shift = 2 * np.pi * rng.integers(-2, 3, size=cfg.param_shape)
        np.testing.assert_allclose(circuit_forward(cfg, CircuitParams(params.values + shift), state),
                                   circuit_forward(cfg, params, state), atol=1e-12)

    @pytest.mark.parametrize("n,entangler", [(2, "ring-cnot"), (2, "ring-cz"), (4, "ring-cnot"),
                                             (4, "linear-cnot"), (4, "ring-cz")])
    def test_matches_dense_matrices(self, rng, dense_readout, n, entangler):
        cfg = AnsatzConfig(n, 2, entangler)
        params = CircuitParams.random(cfg, rng)
        state = random_state(n, rng)
        np.testing.assert_allclose(circuit_forward(cfg, params, state),
                                   dense_readout(cfg, params.values, state.amps), atol=1e-12)

    def test_batch_matches_single(self, rng):
        cfg = AnsatzConfig(3, 2)
        params = CircuitParams.random(cfg, rng)
        states = [random_state(3, rng) for _ in range(4)]
        batch = circuit_forward_batch(cfg, params, np.stack([s.amps for s in states]))
        for row, state in enumerate(states):
            np.testing.assert_allclose(batch[row], circuit_forward(cfg, params, state), atol=1e-13)


def finite_difference_vjp(cfg, params, state, upstream, eps=1e-6):
    flat = params.values.ravel()
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        plus, minus = flat.copy(), flat.copy()
        plus[i] += eps
        minus[i] -= eps
        f_plus = upstream @ circuit_forward(cfg, CircuitParams(plus.reshape(cfg.param_shape)), state)
        f_minus = upstream @ circuit_forward(cfg, CircuitParams(minus.reshape(cfg.param_shape)), state)
        grad[i] = (f_plus - f_minus) / (2 * eps)
    return grad.reshape(cfg.param_shape)


class TestCircuitGradient:
    def test_matches_finite_differences(self, rng):
        cfg = AnsatzConfig(2, 2)
        for _ in range(100):
            params = CircuitParams.random(cfg, rng)
            state = random_state(2, rng)
            upstream = rng.standard_normal(2)
            exact = circuit_gradient(cfg, params, state, upstream)
            approx = finite_difference_vjp(cfg, params, state, upstream)
            scale = max(1.0, np.max(np.abs(exact)))
            np.testing.assert_allclose(exact, approx, rtol=0, atol=1e-5 * scale)

    def test_matches_finite_differences_on_ring(self, rng):
        cfg = AnsatzConfig(3, 2, "ring-cz")
        params = CircuitParams.random(cfg, rng)
        state = random_state(3, rng)
        upstream = rng.standard_normal(3)
        np.testing.assert_allclose(circuit_gradient(cfg, params, state, upstream),
                                   finite_difference_vjp(cfg, params, state, upstream), atol=1e-6)

    def test_zero_upstream_gives_zero(self, rng):
        cfg = AnsatzConfig(2, 1)
        grad = circuit_gradient(cfg, CircuitParams.random(cfg, rng), StateVector.zero(2), np.zeros(2))
        np.testing.assert_array_equal(grad, np.zeros(cfg.param_shape))

    def test_batch_gradient_sums_samples(self, rng):
        cfg = AnsatzConfig(2, 2)
        params = CircuitParams.random(cfg, rng)
        states = [random_state(2, rng) for _ in range(3)]
        upstream = rng.standard_normal((3, 2))
        batched = circuit_gradient(cfg, params, np.stack([s.amps for s in states]), upstream)
        summed = sum(circuit_gradient(cfg, params, s, u) for s, u in zip(states, upstream))
        np.testing.assert_allclose(batched, summed, atol=1e-12)

    def test_upstream_shape_checked(self):
        cfg = AnsatzConfig(2, 1)
        with pytest.raises(ValueError, match="Upstream shape"):
            circuit_gradient(cfg, CircuitParams.zeros(cfg), StateVector.zero(2), np.ones(3))
