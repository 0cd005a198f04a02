"""
Classical post-processing head: dense tanh layers with manual backpropagation.

Every layer maps a -> sigma(W a + b) with sigma applied element-wise. Forward
and backward accept a single input vector or a (B, k) batch.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

ACTIVATIONS = ("tanh", "identity")


@dataclass
class DenseLayer:
    """Dense layer with weights W (h x k), bias b (h) and an activation."""

    W: np.ndarray
    b: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        self.W = np.array(self.W, dtype=float)
        self.b = np.array(self.b, dtype=float).reshape(-1)
        if self.W.ndim != 2:
            raise ValueError(f"W must be a matrix, got shape {self.W.shape}")
        if self.b.shape[0] != self.W.shape[0]:
            raise ValueError(f"Bias length {self.b.shape[0]} does not match {self.W.shape[0]} neurons")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"Unknown activation '{self.activation}'")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("DenseLayer parameters must be finite")

    @property
    def in_features(self) -> int:
        return self.W.shape[1]

    @property
    def out_features(self) -> int:
        return self.W.shape[0]


@dataclass
class Mlp:
    """Chain of dense layers ending in a single tanh unit."""

    layers: List[DenseLayer]
    generation: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("An Mlp needs at least one layer")
        for i in range(1, len(self.layers)):
            if self.layers[i].in_features != self.layers[i - 1].out_features:
                raise ValueError(
                    f"Layer {i} expects {self.layers[i].in_features} inputs but layer {i - 1} "
                    f"produces {self.layers[i - 1].out_features}"
                )
        if self.layers[-1].out_features != 1:
            raise ValueError("The final layer must output a single scalar")
        if self.layers[-1].activation != "tanh":
            raise ValueError("The final layer must use tanh so the output stays in (-1, 1)")

    @property
    def in_features(self) -> int:
        return self.layers[0].in_features

    @property
    def sizes(self) -> List[int]:
        return [self.in_features] + [layer.out_features for layer in self.layers]

    @property
    def n_params(self) -> int:
        return sum(layer.W.size + layer.b.size for layer in self.layers)

    def flat_params(self) -> np.ndarray:
        """Concatenation of every layer's W (row-major) followed by its b."""
        return np.concatenate([np.concatenate([layer.W.ravel(), layer.b]) for layer in self.layers])

    def set_flat_params(self, flat: np.ndarray) -> None:
        """Load parameters in ``flat_params`` order; outstanding caches become stale."""
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params,):
            raise ValueError(f"Expected {self.n_params} parameters, got shape {flat.shape}")
        offset = 0
        for layer in self.layers:
            size = layer.W.size
            layer.W = flat[offset:offset + size].reshape(layer.W.shape).copy()
            offset += size
            layer.b = flat[offset:offset + layer.b.size].copy()
            offset += layer.b.size
        self.generation += 1


@dataclass
class MlpCache:
    """Per-layer inputs and post-activations recorded by ``mlp_forward``."""

    mlp_id: int
    generation: int
    batched: bool
    inputs: List[np.ndarray]
    outputs: List[np.ndarray]


LayerGrads = List[Tuple[np.ndarray, np.ndarray]]


def mlp_forward(mlp: Mlp, x: np.ndarray) -> Tuple[Union[float, np.ndarray], MlpCache]:
    """
    Evaluate the head.

    Args:
        mlp: Network
        x: Input vector of length k, or a (B, k) batch

    Returns:
        Output scalar (array of B outputs for a batch) and the cache for backprop
    """
    x = np.asarray(x, dtype=float)
    batched = x.ndim == 2
    a = x if batched else x.reshape(1, -1)
    if a.shape[1] != mlp.in_features:
        raise ValueError(f"Input has {a.shape[1]} features, first layer expects {mlp.in_features}")

    inputs, outputs = [], []
    for layer in mlp.layers:
        inputs.append(a)
        z = a @ layer.W.T + layer.b
        a = np.tanh(z) if layer.activation == "tanh" else z
        outputs.append(a)

    cache = MlpCache(id(mlp), mlp.generation, batched, inputs, outputs)
    out = a[:, 0]
    return (out if batched else float(out[0])), cache


def mlp_backward(mlp: Mlp, cache: MlpCache,
                 upstream: Union[float, np.ndarray]) -> Tuple[LayerGrads, np.ndarray]:
    """
    Backpropagate ``upstream`` (dC/d output) through the head.

    Batch gradients are summed over samples.

    Returns:
        [(dW, db) per layer] and dC/d input (shape (k,) or (B, k))
    """
    if cache.mlp_id != id(mlp) or cache.generation != mlp.generation:
        raise ValueError("Stale or mismatched cache: parameters changed since the forward pass")
    if len(cache.inputs) != len(mlp.layers):
        raise ValueError("Cache does not match the network depth")

    delta = np.asarray(upstream, dtype=float).reshape(-1, 1)
    if delta.shape[0] != cache.inputs[0].shape[0]:
        raise ValueError(f"Upstream holds {delta.shape[0]} values for {cache.inputs[0].shape[0]} samples")

    grads: LayerGrads = [None] * len(mlp.layers)
    for i in range(len(mlp.layers) - 1, -1, -1):
        layer = mlp.layers[i]
        if layer.activation == "tanh":
            delta = delta * (1.0 - cache.outputs[i] ** 2)
        grads[i] = (delta.T @ cache.inputs[i], delta.sum(axis=0))
        delta = delta @ layer.W

    grad_input = delta if cache.batched else delta[0]
    return grads, grad_input


def flatten_grads(grads: LayerGrads) -> np.ndarray:
    """Gradients in ``Mlp.flat_params`` order."""
    return np.concatenate([np.concatenate([dW.ravel(), db]) for dW, db in grads])


def mlp_init(layer_sizes: Sequence[int], seed: Optional[int] = None) -> Mlp:
    """
    Build a tanh network with fan-in scaled uniform weights and zero biases.

    Args:
        layer_sizes: [k, h_1, ..., 1]; k is the input width
        seed: Seed for the weight draw

    Returns:
        Initialized network
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ValueError(f"Need an input size and at least one layer, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ValueError(f"Layer sizes must be positive, got {sizes}")
    if sizes[-1] != 1:
        raise ValueError(f"The last layer size must be 1, got {sizes[-1]}")

    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, width in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        layers.append(DenseLayer(rng.uniform(-bound, bound, size=(width, fan_in)), np.zeros(width), "tanh"))
    return Mlp(layers)
