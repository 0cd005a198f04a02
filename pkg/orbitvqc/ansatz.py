"""
Amplitude encoding and the layered parametrized circuit.

Each layer applies RX(alpha), RY(beta), RZ(gamma) to every qubit and then the
entangler; the readout is <Z_q> on every qubit. Rotations follow
R_P(theta) = exp(-i theta P / 2), which makes the parameter-shift rule with
shifts of +-pi/2 exact.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from .config import Config
from .statevec import (
    Gate2Q,
    StateVector,
    apply_cnot,
    apply_cz,
    apply_matrix_1q,
    expect_z_all,
    rx_matrix,
    ry_matrix,
    rz_matrix,
)

SHIFT = np.pi / 2


@dataclass(frozen=True)
class AnsatzConfig:
    """Circuit shape: width, depth, entangler topology and encoding padding."""

    n_qubits: int
    n_layers: int = Config.DEFAULT_LAYERS
    entangler: str = Config.DEFAULT_ENTANGLER
    pad: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be at least 1, got {self.n_layers}")
        if self.entangler not in Config.ENTANGLERS:
            raise ValueError(
                f"Unknown entangler '{self.entangler}'. Valid: {', '.join(Config.ENTANGLERS)}"
            )
        object.__setattr__(self, "pad", tuple(float(v) for v in self.pad))

    @property
    def param_shape(self) -> Tuple[int, int, int]:
        return (self.n_layers, self.n_qubits, 3)

    @property
    def n_params(self) -> int:
        return self.n_layers * self.n_qubits * 3

    def entangling_gates(self) -> List[Gate2Q]:
        """Gates closing every layer, in application order."""
        n = self.n_qubits
        if n == 1:
            return []
        kind = "CZ" if self.entangler == "ring-cz" else "CNOT"
        gates = [Gate2Q(kind, q, q + 1) for q in range(1, n)]
        if self.entangler != "linear-cnot" and n >= 3:
            gates.append(Gate2Q(kind, n, 1))
        return gates


@dataclass
class CircuitParams:
    """Rotation angles of shape [L, n, 3], slots ordered (alpha, beta, gamma)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[2] != 3:
            raise ValueError(f"CircuitParams must have shape [L, n, 3], got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("CircuitParams contain non-finite angles")

    @classmethod
    def zeros(cls, cfg: AnsatzConfig) -> "CircuitParams":
        return cls(np.zeros(cfg.param_shape))

    @classmethod
    def random(cls, cfg: AnsatzConfig, rng: np.random.Generator,
               scale: float = Config.DEFAULT_INIT_SCALE) -> "CircuitParams":
        """Angles drawn uniformly from [-scale, scale); scale=pi covers a full period."""
        if not 0.0 < scale <= np.pi:
            raise ValueError(f"Initial angle scale must lie in (0, pi], got {scale}")
        return cls(rng.uniform(-scale, scale, size=cfg.param_shape))

    def check_against(self, cfg: AnsatzConfig) -> None:
        if self.values.shape != cfg.param_shape:
            raise ValueError(
                f"Parameter shape {self.values.shape} does not match circuit shape {cfg.param_shape}"
            )


def amplitude_encode(features: Sequence[complex], n_qubits: int,
                     pad: Sequence[float] = ()) -> StateVector:
    """
    Load ``features ++ pad`` as normalized amplitudes of an n-qubit state.

    Missing trailing amplitudes are zero.

    Args:
        features: Complex feature vector of length <= 2^n
        n_qubits: Number of qubits
        pad: Free amplitudes appended after the features

    Returns:
        Normalized state
    """
    return StateVector(n_qubits, encode_batch(np.asarray(features)[None, :], n_qubits, pad)[0])


def encode_batch(features: np.ndarray, n_qubits: int, pad: Sequence[float] = ()) -> np.ndarray:
    """Vectorized ``amplitude_encode`` over the rows of ``features``; returns raw (B, 2^n) amplitudes."""
    features = np.asarray(features, dtype=complex)
    if features.ndim != 2:
        raise ValueError(f"Expected a 2-D feature matrix, got shape {features.shape}")
    dim = 2 ** n_qubits
    width = features.shape[1] + len(pad)
    if width > dim:
        raise ValueError(f"{width} amplitudes do not fit into {n_qubits} qubits ({dim} slots)")
    amps = np.zeros((features.shape[0], dim), dtype=complex)
    amps[:, :features.shape[1]] = features
    amps[:, features.shape[1]:width] = np.asarray(pad, dtype=float)
    norms = np.linalg.norm(amps, axis=1)
    if np.any(norms == 0):
        raise ValueError("Cannot amplitude-encode a zero-norm feature vector")
    return amps / norms[:, None]


def fused_rotations(values: np.ndarray) -> np.ndarray:
    """RZ(gamma) RY(beta) RX(alpha) per (layer, qubit); shape (..., L, n, 2, 2)."""
    return rz_matrix(values[..., 2]) @ ry_matrix(values[..., 1]) @ rx_matrix(values[..., 0])


def _simulate(cfg: AnsatzConfig, values: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """
    Run the circuit on raw amplitudes.

    ``values`` is either one parameter tensor (L, n, 3) or a stack (S, L, n, 3);
    with a stack, ``amps`` must carry the same leading S axis.
    """
    fused = fused_rotations(values)
    stacked = values.ndim == 4
    if stacked and amps.shape[0] != values.shape[0]:
        raise ValueError(f"Stacked simulation needs amps with leading axis {values.shape[0]}")
    # one singleton per batch axis between the stack axis and the amplitudes
    stack_shape = (values.shape[0],) + (1,) * (amps.ndim - 2) + (2, 2) if stacked else None
    gates = cfg.entangling_gates()
    for layer in range(cfg.n_layers):
        for q in range(cfg.n_qubits):
            if stacked:
                matrix = fused[:, layer, q].reshape(stack_shape)
            else:
                matrix = fused[layer, q]
            amps = apply_matrix_1q(amps, matrix, q + 1, cfg.n_qubits)
        for gate in gates:
            if gate.kind == "CZ":
                amps = apply_cz(amps, gate.qubit_a, gate.qubit_b, cfg.n_qubits)
            else:
                amps = apply_cnot(amps, gate.qubit_a, gate.qubit_b, cfg.n_qubits)
    return amps


def circuit_forward(cfg: AnsatzConfig, params: CircuitParams, encoded: StateVector) -> np.ndarray:
    """
    Per-qubit Z expectations of the circuit applied to ``encoded``.

    Returns:
        Array [<Z_1>, ..., <Z_n>], each in [-1, 1]
    """
    params.check_against(cfg)
    if encoded.n_qubits != cfg.n_qubits:
        raise ValueError(f"State has {encoded.n_qubits} qubits, circuit expects {cfg.n_qubits}")
    return circuit_forward_batch(cfg, params, encoded.amps[None, :])[0]


def circuit_forward_batch(cfg: AnsatzConfig, params: CircuitParams, amps: np.ndarray) -> np.ndarray:
    """``circuit_forward`` over a (B, 2^n) amplitude batch; returns (B, n)."""
    params.check_against(cfg)
    amps = np.asarray(amps, dtype=complex)
    if amps.ndim != 2 or amps.shape[1] != 2 ** cfg.n_qubits:
        raise ValueError(f"Expected a (B, {2 ** cfg.n_qubits}) amplitude batch, got {amps.shape}")
    return expect_z_all(_simulate(cfg, params.values, amps), cfg.n_qubits)


def circuit_gradient(cfg: AnsatzConfig, params: CircuitParams,
                     encoded: Union[StateVector, np.ndarray],
                     upstream: np.ndarray) -> np.ndarray:
    """
    Vector-Jacobian product of the readout by the parameter-shift rule.

    d<Z_q>/d theta = (f(theta + pi/2) - f(theta - pi/2)) / 2 for every angle. All
    2P shifted circuits run as one stacked simulation.

    Args:
        cfg: Circuit shape
        params: Current angles
        encoded: One state, or a (B, 2^n) batch of raw amplitudes
        upstream: dC/d<Z_q>, shape (n,) for one state or (B, n) for a batch

    Returns:
        Gradient tensor shaped like ``params.values``
    """
    params.check_against(cfg)
    if isinstance(encoded, StateVector):
        amps = encoded.amps[None, :]
        upstream = np.asarray(upstream, dtype=float).reshape(1, -1)
    else:
        amps = np.asarray(encoded, dtype=complex)
        upstream = np.asarray(upstream, dtype=float)
        if upstream.ndim == 1:
            upstream = upstream[None, :]
    if upstream.shape != (amps.shape[0], cfg.n_qubits):
        raise ValueError(
            f"Upstream shape {upstream.shape} does not match ({amps.shape[0]}, {cfg.n_qubits})"
        )
    if not np.any(upstream):
        return np.zeros(cfg.param_shape)

    n_params = cfg.n_params
    shifts = np.zeros((2 * n_params, n_params))
    shifts[np.arange(n_params), np.arange(n_params)] = SHIFT
    shifts[n_params + np.arange(n_params), np.arange(n_params)] = -SHIFT
    stacked = params.values.reshape(1, -1) + shifts
    stacked = stacked.reshape((2 * n_params,) + cfg.param_shape)

    state_stack = np.broadcast_to(amps, (2 * n_params,) + amps.shape)
    expectations = expect_z_all(_simulate(cfg, stacked, state_stack), cfg.n_qubits)
    derivative = 0.5 * (expectations[:n_params] - expectations[n_params:])
    grad = np.einsum("pbq,bq->p", derivative, upstream)
    return grad.reshape(cfg.param_shape)
