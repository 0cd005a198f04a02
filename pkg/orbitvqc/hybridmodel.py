"""
Hybrid model: variational circuit followed by the classical head.

The circuit's per-qubit readout feeds the tanh head; the MSE cost is
minimized with Adam over the concatenated parameter vector (circuit angles
first, then the head). Gradients are chained by hand: dC/dy' drives
mlp_backward, whose input gradient drives the parameter-shift circuit gradient.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from .ansatz import (
    AnsatzConfig,
    CircuitParams,
    amplitude_encode,
    circuit_forward,
    circuit_forward_batch,
    circuit_gradient,
    encode_batch,
)
from .config import Config
from .logger import log_execution_time
from .neuralnet import Mlp, flatten_grads, mlp_backward, mlp_forward, mlp_init

if TYPE_CHECKING:
    from .datasets import Dataset


@dataclass
class HybridModel:
    """Circuit shape and angles plus an optional head (``None`` reads <Z_1> directly)."""

    cfg: AnsatzConfig
    qparams: CircuitParams
    head: Optional[Mlp]

    def __post_init__(self):
        self.qparams.check_against(self.cfg)
        if self.head is not None and self.head.in_features != self.cfg.n_qubits:
            raise ValueError(
                f"Head expects {self.head.in_features} inputs but the circuit reads {self.cfg.n_qubits} qubits"
            )

    @classmethod
    def build(cls, cfg: AnsatzConfig, hidden: Optional[Sequence[int]], seed: int,
              init_scale: float = Config.DEFAULT_INIT_SCALE) -> "HybridModel":
        """
        Fresh model with random angles and a fan-in scaled head.

        Args:
            cfg: Circuit shape
            hidden: Hidden layer widths; () for a single tanh unit on the
                readout, None for the quantum-only model
            seed: Seed for every initial parameter
            init_scale: Circuit angles start uniform in [-init_scale, init_scale)
        """
        seeds = np.random.SeedSequence(seed).spawn(2)
        qparams = CircuitParams.random(cfg, np.random.default_rng(seeds[0]), init_scale)
        head = None
        if hidden is not None:
            head = mlp_init([cfg.n_qubits, *hidden, 1], seed=seeds[1])
        return cls(cfg, qparams, head)

    @property
    def n_params(self) -> int:
        return self.cfg.n_params + (self.head.n_params if self.head is not None else 0)

    def flat_params(self) -> np.ndarray:
        parts = [self.qparams.values.ravel()]
        if self.head is not None:
            parts.append(self.head.flat_params())
        return np.concatenate(parts)

    def set_flat_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params,):
            raise ValueError(f"Expected {self.n_params} parameters, got shape {flat.shape}")
        n_circuit = self.cfg.n_params
        self.qparams = CircuitParams(flat[:n_circuit].reshape(self.cfg.param_shape))
        if self.head is not None:
            self.head.set_flat_params(flat[n_circuit:])


@dataclass
class AdamState:
    """Adam moment accumulators over the full parameter vector."""

    m: np.ndarray
    v: np.ndarray
    learning_rate: float
    t: int = 0
    beta1: float = Config.ADAM_BETA1
    beta2: float = Config.ADAM_BETA2
    eps: float = Config.ADAM_EPS

    @classmethod
    def zeros(cls, n_params: int, learning_rate: float) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), learning_rate)


@dataclass
class TrainConfig:
    """Optimization budget and architecture knobs of one training run."""

    epochs: int = Config.DEFAULT_EPOCHS
    batch_size: int = Config.DEFAULT_BATCH_SIZE
    learning_rate: float = Config.DEFAULT_LR
    seed: int = Config.DEFAULT_SEED
    n_layers: int = Config.DEFAULT_LAYERS
    hidden: Optional[Tuple[int, ...]] = Config.DEFAULT_HIDDEN
    entangler: str = Config.DEFAULT_ENTANGLER
    early_stop: bool = True

    def validate(self, dataset_size: Optional[int] = None) -> None:
        if not Config.validate_learning_rate(self.learning_rate):
            raise ValueError(f"Learning rate must lie in (0, 1), got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be positive, got {self.n_layers}")
        if dataset_size is not None and self.batch_size > dataset_size:
            raise ValueError(f"batch_size {self.batch_size} exceeds the {dataset_size} training samples")


@dataclass(frozen=True)
class EpochRecord:
    """Training-history entry; epoch 0 is the untrained model."""

    epoch: int
    cost: float
    train_accuracy: float


def _forward(model: HybridModel, amps: np.ndarray):
    readout = circuit_forward_batch(model.cfg, model.qparams, amps)
    if model.head is None:
        return readout[:, 0], readout, None
    preds, cache = mlp_forward(model.head, readout)
    return preds, readout, cache


def predict(model: HybridModel, x: np.ndarray) -> float:
    """
    Model output y^C for one feature vector: encode, run the circuit, apply the head.

    Returns:
        Real scalar in (-1, 1)
    """
    state = amplitude_encode(x, model.cfg.n_qubits, model.cfg.pad)
    readout = circuit_forward(model.cfg, model.qparams, state)
    if model.head is None:
        return float(readout[0])
    output, _ = mlp_forward(model.head, readout)
    return output


def predict_batch(model: HybridModel, features: np.ndarray) -> np.ndarray:
    """``predict`` over the rows of a (B, k) feature matrix."""
    amps = encode_batch(features, model.cfg.n_qubits, model.cfg.pad)
    return _forward(model, amps)[0]


def mse_cost(predictions: Sequence[float], labels: Sequence[float]) -> float:
    """(1/m) sum (y_i - y'_i)^2."""
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if predictions.shape != labels.shape:
        raise ValueError(f"Length mismatch: {predictions.shape} predictions vs {labels.shape} labels")
    if predictions.size == 0:
        raise ValueError("Cannot compute the cost of an empty batch")
    return float(np.mean((labels - predictions) ** 2))


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> Tuple[np.ndarray, AdamState]:
    """
    One bias-corrected Adam update.

    Returns:
        Updated parameters and a new state with t incremented
    """
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or grads.shape != state.m.shape:
        raise ValueError(
            f"Shape mismatch: params {params.shape}, grads {grads.shape}, moments {state.m.shape}"
        )
    if not np.all(np.isfinite(grads)):
        bad = np.flatnonzero(~np.isfinite(grads))
        raise FloatingPointError(
            f"Non-finite gradient at step {state.t + 1} in {bad.size} entries (first index {bad[0]})"
        )
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grads
    v = state.beta2 * state.v + (1 - state.beta2) * grads ** 2
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    updated = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return updated, AdamState(m, v, state.learning_rate, t, state.beta1, state.beta2, state.eps)


def batch_gradient(model: HybridModel, amps: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Cost of a batch and its gradient over the full parameter vector.

    Args:
        model: Model at its current parameters
        amps: Encoded (B, 2^n) amplitudes
        labels: +-1 labels of the batch

    Returns:
        (cost, gradient in ``HybridModel.flat_params`` order)
    """
    preds, readout, cache = _forward(model, amps)
    cost = mse_cost(preds, labels)
    d_preds = 2.0 * (preds - labels) / labels.shape[0]

    if model.head is None:
        d_readout = np.zeros_like(readout)
        d_readout[:, 0] = d_preds
        head_grad = np.zeros(0)
    else:
        grads, d_readout = mlp_backward(model.head, cache, d_preds)
        head_grad = flatten_grads(grads)

    circuit_grad = circuit_gradient(model.cfg, model.qparams, amps, d_readout)
    return cost, np.concatenate([circuit_grad.ravel(), head_grad])


def _accuracy(preds: np.ndarray, labels: np.ndarray) -> float:
    # sign(0) counts as +1
    predicted = np.where(preds >= 0.0, 1.0, -1.0)
    return float(np.mean(predicted == labels))


def _epoch_record(model: HybridModel, amps: np.ndarray, labels: np.ndarray, epoch: int) -> EpochRecord:
    preds = _forward(model, amps)[0]
    return EpochRecord(epoch, mse_cost(preds, labels), _accuracy(preds, labels))


@log_execution_time
def fit(model: HybridModel, dataset: "Dataset",
        train_cfg: TrainConfig) -> Tuple[HybridModel, List[EpochRecord]]:
    """
    Train ``model`` in place on shuffled mini-batches.

    Each batch does one forward pass, one chained gradient and one Adam step.
    The run stops early once the full training cost moved less than
    Config.EARLY_STOP_TOL over Config.EARLY_STOP_PATIENCE epochs.

    Args:
        model: Model to train
        dataset: Training samples
        train_cfg: Budget, learning rate and shuffling seed

    Returns:
        The trained model and one EpochRecord per epoch, starting at epoch 0
    """
    if len(dataset) == 0:
        raise ValueError("Cannot fit on an empty dataset")
    train_cfg.validate(len(dataset))
    if dataset.n_qubits != model.cfg.n_qubits:
        raise ValueError(f"Dataset has {dataset.n_qubits} qubits, model expects {model.cfg.n_qubits}")

    rng = np.random.default_rng(train_cfg.seed)
    amps = encode_batch(dataset.features_matrix(), model.cfg.n_qubits, model.cfg.pad)
    labels = dataset.labels().astype(float)
    adam = AdamState.zeros(model.n_params, train_cfg.learning_rate)
    patience = Config.EARLY_STOP_PATIENCE

    history = [_epoch_record(model, amps, labels, 0)]
    logging.info(f"Training {model.n_params} parameters on {len(dataset)} samples "
                 f"(initial cost {history[0].cost:.4f}, accuracy {history[0].train_accuracy:.3f})")

    for epoch in range(1, train_cfg.epochs + 1):
        order = rng.permutation(len(dataset))
        for batch_index, start in enumerate(range(0, len(dataset), train_cfg.batch_size)):
            idx = order[start:start + train_cfg.batch_size]
            cost, grad = batch_gradient(model, amps[idx], labels[idx])
            if not np.isfinite(cost):
                raise FloatingPointError(f"Non-finite cost {cost} at epoch {epoch}, batch {batch_index}")
            try:
                params, adam = adam_step(model.flat_params(), grad, adam)
            except FloatingPointError as e:
                logging.error(f"Optimization aborted at epoch {epoch}, batch {batch_index}: {e}")
                raise
            model.set_flat_params(params)

        record = _epoch_record(model, amps, labels, epoch)
        if not np.isfinite(record.cost):
            raise FloatingPointError(f"Non-finite training cost at the end of epoch {epoch}")
        history.append(record)
        if epoch % Config.LOG_EVERY == 0:
            logging.info(f"Epoch {epoch}/{train_cfg.epochs}: cost={record.cost:.5f} "
                         f"accuracy={record.train_accuracy:.3f}")

        if (train_cfg.early_stop and len(history) > patience
                and abs(history[-1].cost - history[-1 - patience].cost) < Config.EARLY_STOP_TOL):
            logging.info(f"Early stop at epoch {epoch}: cost change below {Config.EARLY_STOP_TOL} "
                         f"over {patience} epochs")
            break

    return model, history


def evaluate_accuracy(model: HybridModel, dataset: "Dataset") -> float:
    """Fraction of samples with sign(prediction) == label, sign(0) taken as +1."""
    if len(dataset) == 0:
        raise ValueError("Cannot evaluate on an empty dataset")
    preds = predict_batch(model, dataset.features_matrix())
    return _accuracy(preds, dataset.labels().astype(float))
