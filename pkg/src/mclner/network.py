"""Scoring network: dense layers and the factorized bilinear layer.

Two architectures produce per-tag scores from the concatenated input:

* plain:  input -> tanh dense (hidden_size) -> linear output (n_tags)
* tensor: input -> factorized bilinear layer (tensor_size) -> linear output

The bilinear layer computes, per output unit i, a quadratic form
``(x^T P[i]) (Q[i] x)`` plus a linear term, squashed by tanh.  Each slice
is the product of two rank-r factors, so the quadratic cost stays
O(h1 * r) per unit and the full h1 x h1 slice is never materialized.

Gradients are hand-derived; every forward returns a cache that the
matching backward consumes.  All math is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INIT_SCALE = 0.01

ARCHITECTURES = ("plain", "tensor")


def _glorot(rng: np.random.Generator, n_out: int, n_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-limit, limit, size=(n_out, n_in))


class DenseLayer:
    """Affine map with an optional tanh."""

    def __init__(self, n_in: int, n_out: int, activation: str = "tanh",
                 rng: np.random.Generator | None = None):
        if n_in < 1 or n_out < 1:
            raise ValueError("layer needs n_in >= 1 and n_out >= 1")
        if activation not in ("tanh", "identity"):
            raise ValueError(f"unknown activation {activation!r}")
        self.W = np.zeros((n_out, n_in)) if rng is None else _glorot(rng, n_out, n_in)
        self.b = np.zeros(n_out, dtype=np.float64)
        self.activation = activation

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]

    def forward(self, X: np.ndarray) -> np.ndarray:
        Y, _ = self.forward_cached(X)
        return Y

    def forward_cached(self, X: np.ndarray):
        """Returns (Y, cache); X has shape (n, n_in), Y (n, n_out)."""
        if X.ndim != 2 or X.shape[1] != self.n_in:
            raise ValueError(f"expected input of shape (n, {self.n_in}), got {X.shape}")
        Z = X @ self.W.T + self.b
        if self.activation == "tanh":
            Y = np.tanh(Z)
        else:
            Y = Z
        return Y, (X, Y)

    def backward(self, dY: np.ndarray, cache):
        """Returns (dX, {"W": gW, "b": gb}) for the cached forward."""
        if cache is None:
            raise ValueError("backward called without a forward cache")
        X, Y = cache
        if self.activation == "tanh":
            dZ = dY * (1.0 - Y * Y)
        else:
            dZ = dY
        gW = dZ.T @ X
        gb = dZ.sum(axis=0)
        dX = dZ @ self.W
        return dX, {"W": gW, "b": gb}


class FactorizedTensorLayer:
    """tanh of per-unit low-rank quadratic forms plus a linear term.

    P has shape (n_out, n_in, r) and Q (n_out, r, n_in); unit i computes
    tanh((x^T P[i]) (Q[i] x) + (W x + b)_i).
    """

    def __init__(self, n_in: int, n_out: int, factors: int,
                 rng: np.random.Generator | None = None):
        if n_in < 1 or n_out < 1 or factors < 1:
            raise ValueError("layer needs n_in, n_out and factors all >= 1")
        if rng is None:
            self.W = np.zeros((n_out, n_in))
            self.P = np.zeros((n_out, n_in, factors))
            self.Q = np.zeros((n_out, factors, n_in))
        else:
            self.W = _glorot(rng, n_out, n_in)
            self.P = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_out, n_in, factors))
            self.Q = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_out, factors, n_in))
        self.b = np.zeros(n_out, dtype=np.float64)

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]

    @property
    def factors(self) -> int:
        return self.P.shape[2]

    @property
    def param_count(self) -> int:
        h2, h1, r = self.P.shape
        return h2 * (2 * h1 * r) + h2 * h1 + h2

    def dense_slices(self) -> np.ndarray:
        """Materialized (n_out, n_in, n_in) slices P[i] @ Q[i], for oracles."""
        return np.einsum("ihr,irk->ihk", self.P, self.Q)

    def forward(self, X: np.ndarray) -> np.ndarray:
        Y, _ = self.forward_cached(X)
        return Y

    def forward_cached(self, X: np.ndarray):
        if X.ndim != 2 or X.shape[1] != self.n_in:
            raise ValueError(f"expected input of shape (n, {self.n_in}), got {X.shape}")
        U = np.einsum("bh,ihr->bir", X, self.P)
        V = np.einsum("irh,bh->bir", self.Q, X)
        Z = (U * V).sum(axis=2) + X @ self.W.T + self.b
        Y = np.tanh(Z)
        return Y, (X, Y, U, V)

    def backward(self, dY: np.ndarray, cache):
        if cache is None:
            raise ValueError("backward called without a forward cache")
        X, Y, U, V = cache
        dZ = dY * (1.0 - Y * Y)
        gW = dZ.T @ X
        gb = dZ.sum(axis=0)
        gP = np.einsum("bi,bh,bir->ihr", dZ, X, V)
        gQ = np.einsum("bi,bir,bh->irh", dZ, U, X)
        dX = dZ @ self.W
        dX += np.einsum("bi,ihr,bir->bh", dZ, self.P, V)
        dX += np.einsum("bi,irh,bir->bh", dZ, self.Q, U)
        return dX, {"W": gW, "b": gb, "P": gP, "Q": gQ}


def forward_plain(x: np.ndarray, hidden: DenseLayer, output: DenseLayer) -> np.ndarray:
    """Per-tag scores for one input vector: output(tanh(hidden(x)))."""
    if output.n_in != hidden.n_out:
        raise ValueError("output layer input size does not match hidden layer")
    return output.forward(hidden.forward(np.asarray(x, dtype=np.float64)[None, :]))[0]


def forward_tensor(x: np.ndarray, layer: FactorizedTensorLayer) -> np.ndarray:
    """Hidden activations of the factorized layer for one input vector."""
    return layer.forward(np.asarray(x, dtype=np.float64)[None, :])[0]


@dataclass
class NetworkConfig:
    """Architecture choice plus the sizes it needs."""

    architecture: str = "plain"
    hidden_size: int = 300
    tensor_size: int = 50
    factors: int = 3
    tag_count: int = 1
    # optional tanh dense layer between the tensor layer and the output
    extra_hidden: int = 0

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}")
        if self.tag_count < 1:
            raise ValueError("tag_count must be >= 1")
        if self.architecture == "plain" and self.hidden_size < 1:
            raise ValueError("plain architecture needs hidden_size >= 1")
        if self.architecture == "tensor":
            if self.tensor_size < 1 or self.factors < 1:
                raise ValueError("tensor architecture needs tensor_size >= 1 and factors >= 1")
        if self.extra_hidden < 0:
            raise ValueError("extra_hidden must be >= 0")


class ScoringNetwork:
    """Stack of layers mapping (n, input_size) inputs to (n, n_tags) scores."""

    def __init__(self, input_size: int, config: NetworkConfig,
                 rng: np.random.Generator | None = None):
        self.input_size = input_size
        self.config = config
        self.layers: list = []
        if config.architecture == "plain":
            self.layers.append(("hidden", DenseLayer(input_size, config.hidden_size, "tanh", rng)))
            width = config.hidden_size
        else:
            self.layers.append(("tensor", FactorizedTensorLayer(
                input_size, config.tensor_size, config.factors, rng)))
            width = config.tensor_size
            if config.extra_hidden:
                self.layers.append(("extra", DenseLayer(width, config.extra_hidden, "tanh", rng)))
                width = config.extra_hidden
        self.layers.append(("output", DenseLayer(width, config.tag_count, "identity", rng)))

    def parameters(self) -> dict[str, np.ndarray]:
        """Flat name -> array registry; arrays are the live parameters."""
        out = {}
        for name, layer in self.layers:
            if isinstance(layer, FactorizedTensorLayer):
                out[f"{name}.W"] = layer.W
                out[f"{name}.b"] = layer.b
                out[f"{name}.P"] = layer.P
                out[f"{name}.Q"] = layer.Q
            else:
                out[f"{name}.W"] = layer.W
                out[f"{name}.b"] = layer.b
        return out

    def forward(self, X: np.ndarray) -> np.ndarray:
        Y, _ = self.forward_cached(X)
        return Y

    def forward_cached(self, X: np.ndarray):
        X = np.asarray(X, dtype=np.float64)
        caches = []
        out = X
        for _, layer in self.layers:
            out, cache = layer.forward_cached(out)
            caches.append(cache)
        return out, caches

    def backward(self, d_scores: np.ndarray, caches):
        """Returns (d_input, {param name: gradient}) for a cached forward."""
        if caches is None or len(caches) != len(self.layers):
            raise ValueError("backward called without a matching forward cache")
        grads: dict[str, np.ndarray] = {}
        grad = d_scores
        for (name, layer), cache in zip(reversed(self.layers), reversed(caches)):
            grad, layer_grads = layer.backward(grad, cache)
            for key, val in layer_grads.items():
                grads[f"{name}.{key}"] = val
        return grad, grads
