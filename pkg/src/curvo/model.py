"""Pose regressor: stacked LSTM layers plus a fully connected head.

Each LSTM layer carries one stacked weight matrix of shape
``4n x (n_prev + n)`` over the concatenated (input, previous hidden) column,
with gate order (i, f, o, g): i/f/o through the logistic function, g through
tanh, then ``c' = f*c + i*g`` and ``h' = o*tanh(c')``. A bias column is added
on top of the stacked product (zero bias reproduces the bias-free cell
exactly); the forget-gate slice is initialized to +1 for trainability.

Vectors are (n, 1) columns throughout; per-step outputs are 6x1 pose columns
ordered (tx, ty, tz, roll, pitch, yaw).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad

OUTPUT_DIM = 6


@dataclass(frozen=True)
class RegressorConfig:
    input_dim: int
    lstm_sizes: tuple[int, ...] = (32, 32)
    output_dim: int = OUTPUT_DIM
    head_hidden: int | None = None  # optional second FC layer with tanh between
    dropout: float = 0.0  # inverted dropout on inter-layer h vectors, 0 = off

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if not self.lstm_sizes:
            raise ValueError("at least one LSTM layer is required")
        if self.output_dim != OUTPUT_DIM:
            raise ValueError(f"output_dim is fixed at {OUTPUT_DIM}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        object.__setattr__(self, "lstm_sizes", tuple(int(n) for n in self.lstm_sizes))


@dataclass
class HiddenState:
    """Per-layer (h, c) columns; plain arrays, detached from any tape."""

    layers: list[tuple[np.ndarray, np.ndarray]]

    @classmethod
    def zeros(cls, config: RegressorConfig) -> "HiddenState":
        return cls([(np.zeros((n, 1)), np.zeros((n, 1))) for n in config.lstm_sizes])

    def validate(self, config: RegressorConfig) -> None:
        if len(self.layers) != len(config.lstm_sizes):
            raise ad.ShapeMismatchError("hidden_state", len(self.layers), len(config.lstm_sizes))
        for (h, c), n in zip(self.layers, config.lstm_sizes):
            if h.shape != (n, 1) or c.shape != (n, 1):
                raise ad.ShapeMismatchError("hidden_state", h.shape, (n, 1))
            if not (np.isfinite(h).all() and np.isfinite(c).all()):
                raise ValueError("hidden state contains non-finite entries")


def init_params(config: RegressorConfig, seed: int) -> ad.ParamStore:
    """Uniform [-k, k] init with k = 1/sqrt(fan-in); forget-gate bias +1."""
    rng = np.random.default_rng(seed)
    store = ad.ParamStore()
    prev = config.input_dim
    for layer, n in enumerate(config.lstm_sizes):
        fan_in = prev + n
        k = 1.0 / np.sqrt(fan_in)
        store.add(f"lstm{layer}.W", rng.uniform(-k, k, size=(4 * n, fan_in)))
        bias = np.zeros((4 * n, 1))
        bias[n : 2 * n] = 1.0
        store.add(f"lstm{layer}.b", bias)
        prev = n
    if config.head_hidden is not None:
        k = 1.0 / np.sqrt(prev)
        store.add("head0.W", rng.uniform(-k, k, size=(config.head_hidden, prev)))
        store.add("head0.b", np.zeros((config.head_hidden, 1)))
        prev = config.head_hidden
    k = 1.0 / np.sqrt(prev)
    store.add("head.W", rng.uniform(-k, k, size=(config.output_dim, prev)))
    store.add("head.b", np.zeros((config.output_dim, 1)))
    return store


def lstm_cell(x: ad.Value, state: tuple[ad.Value, ad.Value], weights: ad.Value, bias: ad.Value):
    """One cell update; returns (h', c') as tape Values."""
    h_prev, c_prev = state
    n = h_prev.shape[0]
    if weights.shape != (4 * n, x.shape[0] + n):
        raise ad.ShapeMismatchError("lstm_cell", weights.shape, (4 * n, x.shape[0] + n))
    stacked = ad.concat_rows(x, h_prev)
    gates = ad.add(ad.matmul(weights, stacked), bias)
    i = ad.sigmoid(ad.slice_rows(gates, 0, n))
    f = ad.sigmoid(ad.slice_rows(gates, n, 2 * n))
    o = ad.sigmoid(ad.slice_rows(gates, 2 * n, 3 * n))
    g = ad.tanh(ad.slice_rows(gates, 3 * n, 4 * n))
    c_new = ad.add(ad.mul_elementwise(f, c_prev), ad.mul_elementwise(i, g))
    h_new = ad.mul_elementwise(o, ad.tanh(c_new))
    return h_new, c_new


def forward_sequence(
    tape: ad.Tape,
    features: np.ndarray,
    config: RegressorConfig,
    store: ad.ParamStore,
    initial: HiddenState | None = None,
    dropout_rng: np.random.Generator | None = None,
):
    """Run the regressor over a (T, input_dim) feature block.

    Returns (predictions, final_state): predictions is a length-T list of 6x1
    Values, row t being the estimated step-t relative pose; final_state holds
    detached (h, c) arrays so a sequence can be continued across calls.
    Dropout is applied only when the config enables it and a generator is
    supplied (training time).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != config.input_dim:
        raise ad.ShapeMismatchError("forward_sequence", features.shape, ("T", config.input_dim))
    if features.shape[0] < 1:
        raise ValueError("forward_sequence needs at least one timestep")
    state = initial if initial is not None else HiddenState.zeros(config)
    state.validate(config)

    weights = [
        (store.leaf(tape, f"lstm{layer}.W"), store.leaf(tape, f"lstm{layer}.b"))
        for layer in range(len(config.lstm_sizes))
    ]
    head_w = store.leaf(tape, "head.W")
    head_b = store.leaf(tape, "head.b")
    head0 = None
    if config.head_hidden is not None:
        head0 = (store.leaf(tape, "head0.W"), store.leaf(tape, "head0.b"))

    layer_state = [
        (tape.constant(h), tape.constant(c)) for h, c in state.layers
    ]
    use_dropout = config.dropout > 0.0 and dropout_rng is not None

    predictions = []
    for t in range(features.shape[0]):
        x = tape.constant(features[t].reshape(-1, 1))
        for layer, (w, b) in enumerate(weights):
            h, c = lstm_cell(x, layer_state[layer], w, b)
            layer_state[layer] = (h, c)
            x = h
            if use_dropout and layer < len(weights) - 1:
                keep = (dropout_rng.random(h.shape) >= config.dropout) / (1.0 - config.dropout)
                x = ad.mul_elementwise(x, tape.constant(keep))
        if head0 is not None:
            x = ad.tanh(ad.add(ad.matmul(head0[0], x), head0[1]))
        predictions.append(ad.add(ad.matmul(head_w, x), head_b))

    final = HiddenState([(h.data.copy(), c.data.copy()) for h, c in layer_state])
    return predictions, final


def predictions_matrix(predictions) -> np.ndarray:
    """Stack per-step 6x1 prediction Values into a (T, 6) array."""
    return np.hstack([p.data for p in predictions]).T
