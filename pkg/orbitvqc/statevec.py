"""
Dense statevector representation of pure n-qubit states.

Qubits are numbered 1..n and qubit 1 is the most significant bit of the
basis index, so amps[k] is the amplitude of |x_1 x_2 ... x_n> with
k = x_1 2^(n-1) + ... + x_n. Gates act through reshaped strided views of
the amplitude array (O(2^n) per gate); no 2^n x 2^n matrix is ever built.

The array-level kernels (``apply_matrix_1q``, ``apply_cnot``, ``apply_cz``,
``expect_z_all``) accept arbitrary leading batch axes and are what the
circuit simulator runs on. The ``StateVector`` operations wrap them for
single validated states.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import Config


_FIXED_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}


def rx_matrix(theta) -> np.ndarray:
    """RX(theta) = exp(-i theta X / 2); broadcasts over array-valued theta."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -1j * s
    out[..., 1, 0] = -1j * s
    out[..., 1, 1] = c
    return out


def ry_matrix(theta) -> np.ndarray:
    """RY(theta) = exp(-i theta Y / 2); broadcasts over array-valued theta."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rz_matrix(theta) -> np.ndarray:
    """RZ(theta) = exp(-i theta Z / 2); broadcasts over array-valued theta."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * theta)
    out[..., 1, 1] = np.exp(0.5j * theta)
    return out


def _check_qubit(qubit: int, n_qubits: int) -> None:
    if not (1 <= qubit <= n_qubits):
        raise ValueError(f"Qubit index {qubit} out of range [1, {n_qubits}]")


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------

def apply_matrix_1q(amps: np.ndarray, matrix: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """
    Apply a 2x2 matrix to one qubit of raw amplitude arrays.

    No normalization is checked, so the kernel is linear in ``amps``.

    Args:
        amps: Complex array of shape (..., 2^n)
        matrix: Array of shape (2, 2), or (..., 2, 2) broadcasting against the
            leading axes of ``amps``
        qubit: Target qubit in [1, n]
        n_qubits: Number of qubits n

    Returns:
        New amplitude array with the same shape as ``amps``
    """
    _check_qubit(qubit, n_qubits)
    batch = amps.shape[:-1]
    view = amps.reshape(batch + (2 ** (qubit - 1), 2, 2 ** (n_qubits - qubit)))
    x0 = view[..., 0, :]
    x1 = view[..., 1, :]
    m = np.asarray(matrix)
    m00 = m[..., 0, 0, None, None]
    m01 = m[..., 0, 1, None, None]
    m10 = m[..., 1, 0, None, None]
    m11 = m[..., 1, 1, None, None]
    out = np.empty(np.broadcast_shapes(view.shape, m00.shape[:-2] + (1, 1, 1)), dtype=complex)
    out[..., 0, :] = m00 * x0 + m01 * x1
    out[..., 1, :] = m10 * x0 + m11 * x1
    return out.reshape(out.shape[:-3] + (2 ** n_qubits,))


def _tensor_view(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    return amps.reshape(amps.shape[:-1] + (2,) * n_qubits)


def apply_cnot(amps: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    """Flip ``target`` on the amplitudes where ``control`` is 1 (raw arrays, batch axes allowed)."""
    _check_qubit(control, n_qubits)
    _check_qubit(target, n_qubits)
    if control == target:
        raise ValueError("CNOT control and target must differ")
    view = _tensor_view(amps, n_qubits)
    offset = amps.ndim - 1
    c_axis = offset + control - 1
    t_axis = offset + target - 1
    index = [slice(None)] * view.ndim
    index[c_axis] = 1
    index = tuple(index)
    out = view.copy()
    # the control axis is dropped by the integer index
    t_axis_sub = t_axis - 1 if t_axis > c_axis else t_axis
    out[index] = np.flip(view[index], axis=t_axis_sub)
    return out.reshape(amps.shape)


def apply_cz(amps: np.ndarray, qubit_a: int, qubit_b: int, n_qubits: int) -> np.ndarray:
    """Negate the amplitudes where both qubits are 1 (raw arrays, batch axes allowed)."""
    _check_qubit(qubit_a, n_qubits)
    _check_qubit(qubit_b, n_qubits)
    if qubit_a == qubit_b:
        raise ValueError("CZ qubits must differ")
    out = _tensor_view(amps, n_qubits).copy()
    offset = amps.ndim - 1
    index = [slice(None)] * out.ndim
    index[offset + qubit_a - 1] = 1
    index[offset + qubit_b - 1] = 1
    out[tuple(index)] *= -1
    return out.reshape(amps.shape)


def expect_z_all(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    """
    Per-qubit Z expectations of raw amplitude arrays.

    Args:
        amps: Complex array of shape (..., 2^n)
        n_qubits: Number of qubits n

    Returns:
        Real array of shape (..., n) with entry q-1 holding <Z_q>
    """
    probs = _tensor_view(np.abs(amps) ** 2, n_qubits)
    offset = amps.ndim - 1
    out = np.empty(amps.shape[:-1] + (n_qubits,))
    for q in range(n_qubits):
        axes = tuple(offset + a for a in range(n_qubits) if a != q)
        marginal = probs.sum(axis=axes) if axes else probs
        out[..., q] = marginal[..., 0] - marginal[..., 1]
    return out


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``n_qubits`` qubits; ``amps`` is read-only."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != 2 ** self.n_qubits:
            raise ValueError(
                f"Expected {2 ** self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape[0]}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > Config.NORM_TOL:
            raise ValueError(f"State is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], normalize: bool = True) -> "StateVector":
        """Build a state from raw amplitudes, normalizing them unless told otherwise."""
        arr = np.asarray(amps, dtype=complex).reshape(-1)
        n_qubits = int(np.log2(arr.shape[0])) if arr.shape[0] > 0 else 0
        if arr.shape[0] == 0 or 2 ** n_qubits != arr.shape[0]:
            raise ValueError(f"Amplitude count {arr.shape[0]} is not a power of two")
        if normalize:
            norm = np.linalg.norm(arr)
            if norm == 0:
                raise ValueError("Cannot normalize the zero vector")
            arr = arr / norm
        return cls(n_qubits, arr)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        """Computational basis state |index> (qubit 1 most significant)."""
        if not (0 <= index < 2 ** n_qubits):
            raise ValueError(f"Basis index {index} out of range for {n_qubits} qubits")
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)

    @classmethod
    def plus(cls, n_qubits: int) -> "StateVector":
        """|+>^n."""
        dim = 2 ** n_qubits
        return cls(n_qubits, np.full(dim, 1 / np.sqrt(dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|^2, insensitive to global phase."""
        return float(abs(inner_product(self, other)) ** 2)


@dataclass(frozen=True, eq=False)
class Gate1Q:
    """Single-qubit unitary with a symbolic tag and optional rotation angle."""

    matrix: np.ndarray
    name: str = "U"
    angle: Optional[float] = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise ValueError(f"Gate1Q matrix must be 2x2, got shape {matrix.shape}")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(2)))
        if deviation > Config.UNITARY_TOL:
            raise ValueError(f"Gate '{self.name}' is not unitary (max |U^dag U - I| = {deviation:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def named(cls, name: str) -> "Gate1Q":
        """One of the fixed gates I, X, Y, Z, H, S."""
        if name not in _FIXED_MATRICES:
            raise ValueError(f"Unknown fixed gate '{name}'. Valid: {', '.join(_FIXED_MATRICES)}")
        return cls(_FIXED_MATRICES[name], name)

    @classmethod
    def rx(cls, theta: float) -> "Gate1Q":
        return cls(rx_matrix(theta), "RX", float(theta))

    @classmethod
    def ry(cls, theta: float) -> "Gate1Q":
        return cls(ry_matrix(theta), "RY", float(theta))

    @classmethod
    def rz(cls, theta: float) -> "Gate1Q":
        return cls(rz_matrix(theta), "RZ", float(theta))

    def dagger(self) -> "Gate1Q":
        return Gate1Q(self.matrix.conj().T, f"{self.name}^dag",
                      None if self.angle is None else -self.angle)


@dataclass(frozen=True)
class Gate2Q:
    """Entangling gate: CZ (symmetric) or CNOT (qubit_a controls qubit_b)."""

    kind: str
    qubit_a: int
    qubit_b: int

    def __post_init__(self):
        if self.kind not in ("CZ", "CNOT"):
            raise ValueError(f"Unknown two-qubit gate kind '{self.kind}'")
        if self.qubit_a == self.qubit_b:
            raise ValueError(f"{self.kind} needs two distinct qubits, got {self.qubit_a} twice")
        if self.qubit_a < 1 or self.qubit_b < 1:
            raise ValueError("Qubit indices start at 1")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _checked_state(amps: np.ndarray, n_qubits: int, operation: str) -> StateVector:
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > Config.NORM_TOL:
        raise RuntimeError(f"Norm drifted to {norm!r} after {operation}")
    return StateVector(n_qubits, amps)


def apply_1q(state: StateVector, gate: Gate1Q, qubit: int) -> StateVector:
    """Return U_qubit |state>."""
    amps = apply_matrix_1q(state.amps, gate.matrix, qubit, state.n_qubits)
    return _checked_state(amps, state.n_qubits, f"{gate.name} on qubit {qubit}")


def apply_2q(state: StateVector, gate: Gate2Q) -> StateVector:
    """Apply a CZ or CNOT gate."""
    if gate.kind == "CZ":
        amps = apply_cz(state.amps, gate.qubit_a, gate.qubit_b, state.n_qubits)
    else:
        amps = apply_cnot(state.amps, gate.qubit_a, gate.qubit_b, state.n_qubits)
    return _checked_state(amps, state.n_qubits, f"{gate.kind}({gate.qubit_a},{gate.qubit_b})")


def expect_z(state: StateVector, qubit: int) -> float:
    """<state| Z_qubit |state>."""
    _check_qubit(qubit, state.n_qubits)
    return float(expect_z_all(state.amps, state.n_qubits)[qubit - 1])


def apply_local_operator(state: StateVector, ops: Sequence[Gate1Q]) -> StateVector:
    """Apply A_1 (x) A_2 (x) ... (x) A_n, one operator per qubit."""
    if len(ops) != state.n_qubits:
        raise ValueError(f"Expected {state.n_qubits} local operators, got {len(ops)}")
    amps = state.amps
    for qubit, gate in enumerate(ops, start=1):
        amps = apply_matrix_1q(amps, gate.matrix, qubit, state.n_qubits)
    return _checked_state(amps, state.n_qubits, "local operator")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.dim != b.dim:
        raise ValueError(f"Dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def single_qubit_purity(state: StateVector, qubit: int) -> float:
    """Tr(rho_q^2) of the one-qubit reduced state; 1 for product factors, 1/2 when maximally mixed."""
    _check_qubit(qubit, state.n_qubits)
    view = state.amps.reshape(2 ** (qubit - 1), 2, 2 ** (state.n_qubits - qubit))
    rho = np.einsum("aib,ajb->ij", view, view.conj())
    return float(np.real(np.trace(rho @ rho)))
