"""Tape-based reverse-mode differentiation over dense float64 matrices.

Deliberately minimal: the op set below is exactly what the pose regressor and
its training objective need. Values are handles into an append-only Tape; the
tape is rebuilt for every forward pass (define-by-run), while long-lived
parameters and their Adam state live in a ParamStore and are re-attached to
each new tape as leaves.

Externally computed derivative chains (the SE(3) composition layer) enter the
tape either through ``splice_external`` (a node with caller-supplied input
Jacobians) or ``inject_external_gradient`` (a pending adjoint consumed by the
next backward pass).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeMismatchError(ValueError):
    def __init__(self, op: str, *shapes):
        super().__init__(f"{op}: incompatible shapes {' vs '.join(str(s) for s in shapes)}")
        self.shapes = shapes


class NonScalarLossError(ValueError):
    """backward() was given a Value that is not 1x1."""


class _Node:
    __slots__ = ("data", "parents", "owner", "grad")

    def __init__(self, data, parents, owner=None):
        self.data = data
        self.parents = parents  # tuple of (node_id, vjp callable)
        self.owner = owner  # (ParamStore, name) for watched parameter leaves
        self.grad = None


@dataclass(frozen=True)
class Value:
    """Handle to one tape node; ``data`` is the forward result."""

    tape: "Tape"
    node_id: int

    @property
    def data(self) -> np.ndarray:
        return self.tape._nodes[self.node_id].data

    @property
    def grad(self) -> np.ndarray | None:
        return self.tape._nodes[self.node_id].grad

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])


class Tape:
    """Append-only record of one forward computation."""

    def __init__(self):
        self._nodes: list[_Node] = []
        self._pending: dict[int, np.ndarray] = {}
        self._param_leaves: dict[tuple[int, str], Value] = {}

    def __len__(self) -> int:
        return len(self._nodes)

    def _record(self, data: np.ndarray, parents=(), owner=None) -> Value:
        self._nodes.append(_Node(np.asarray(data, dtype=np.float64), tuple(parents), owner))
        return Value(self, len(self._nodes) - 1)

    def constant(self, data) -> Value:
        """A leaf that participates in the forward pass but keeps no gradient use."""
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2:
            arr = arr.reshape(-1, 1)
        return self._record(arr)

    def leaf(self, data, owner=None) -> Value:
        return self._record(data, owner=owner)


def _check_same_tape(op, *values):
    tape = values[0].tape
    for v in values[1:]:
        if v.tape is not tape:
            raise ValueError(f"{op}: values belong to different tapes")
    return tape


def matmul(a: Value, b: Value) -> Value:
    tape = _check_same_tape("matmul", a, b)
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatchError("matmul", a.data.shape, b.data.shape)
    a_data, b_data = a.data, b.data
    return tape._record(
        a_data @ b_data,
        parents=(
            (a.node_id, lambda g: g @ b_data.T),
            (b.node_id, lambda g: a_data.T @ g),
        ),
    )


def add(a: Value, b: Value) -> Value:
    """Elementwise sum; also accepts a (1, m) row bias against an (n, m) matrix."""
    tape = _check_same_tape("add", a, b)
    if a.data.shape == b.data.shape:
        return tape._record(
            a.data + b.data,
            parents=((a.node_id, lambda g: g), (b.node_id, lambda g: g)),
        )
    if b.data.shape == (1, a.data.shape[1]):
        return tape._record(
            a.data + b.data,
            parents=(
                (a.node_id, lambda g: g),
                (b.node_id, lambda g: g.sum(axis=0, keepdims=True)),
            ),
        )
    raise ShapeMismatchError("add", a.data.shape, b.data.shape)


def mul_elementwise(a: Value, b: Value) -> Value:
    tape = _check_same_tape("mul_elementwise", a, b)
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError("mul_elementwise", a.data.shape, b.data.shape)
    a_data, b_data = a.data, b.data
    return tape._record(
        a_data * b_data,
        parents=(
            (a.node_id, lambda g: g * b_data),
            (b.node_id, lambda g: g * a_data),
        ),
    )


def concat_rows(a: Value, b: Value) -> Value:
    tape = _check_same_tape("concat_rows", a, b)
    if a.data.shape[1] != b.data.shape[1]:
        raise ShapeMismatchError("concat_rows", a.data.shape, b.data.shape)
    split = a.data.shape[0]
    return tape._record(
        np.vstack([a.data, b.data]),
        parents=(
            (a.node_id, lambda g: g[:split]),
            (b.node_id, lambda g: g[split:]),
        ),
    )


def slice_rows(a: Value, start: int, stop: int) -> Value:
    if not (0 <= start < stop <= a.data.shape[0]):
        raise ShapeMismatchError("slice_rows", a.data.shape, (start, stop))
    shape = a.data.shape

    def vjp(g):
        out = np.zeros(shape)
        out[start:stop] = g
        return out

    return a.tape._record(a.data[start:stop].copy(), parents=((a.node_id, vjp),))


def sigmoid(a: Value) -> Value:
    out = 1.0 / (1.0 + np.exp(-a.data))
    return a.tape._record(out, parents=((a.node_id, lambda g: g * out * (1.0 - out)),))


def tanh(a: Value) -> Value:
    out = np.tanh(a.data)
    return a.tape._record(out, parents=((a.node_id, lambda g: g * (1.0 - out * out)),))


def square(a: Value) -> Value:
    a_data = a.data
    return a.tape._record(a_data * a_data, parents=((a.node_id, lambda g: g * 2.0 * a_data),))


def sum(a: Value) -> Value:  # noqa: A001 - deliberate, mirrors the op vocabulary
    shape = a.data.shape
    out = np.array([[a.data.sum()]])
    return a.tape._record(
        out, parents=((a.node_id, lambda g: np.full(shape, float(g[0, 0]))),)
    )


def scale(a: Value, c: float) -> Value:
    c = float(c)
    return a.tape._record(a.data * c, parents=((a.node_id, lambda g: g * c),))


def splice_external(inputs, data, jacobians) -> Value:
    """Node whose forward value and input Jacobians were computed off-tape.

    ``data`` is an (m, 1) column; ``jacobians[i]`` is the (m, n_i) derivative
    of the output with respect to input i (an (n_i, 1) column Value). During
    backward the upstream adjoint is pushed through each Jacobian transpose.
    """
    if len(inputs) != len(jacobians):
        raise ValueError("splice_external: one Jacobian per input required")
    tape = _check_same_tape("splice_external", *inputs)
    data = np.asarray(data, dtype=np.float64).reshape(-1, 1)
    parents = []
    for value, jac in zip(inputs, jacobians):
        jac = np.asarray(jac, dtype=np.float64)
        if jac.shape != (data.shape[0], value.data.shape[0]) or value.data.shape[1] != 1:
            raise ShapeMismatchError("splice_external", jac.shape, value.data.shape)
        parents.append((value.node_id, lambda g, jac=jac: jac.T @ g))
    return tape._record(data, parents=parents)


def inject_external_gradient(v: Value, upstream) -> None:
    """Queue an adjoint for ``v``, applied when backward next runs on its tape."""
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != v.data.shape:
        raise ShapeMismatchError("inject_external_gradient", upstream.shape, v.data.shape)
    pending = v.tape._pending
    if v.node_id in pending:
        pending[v.node_id] = pending[v.node_id] + upstream
    else:
        pending[v.node_id] = upstream.copy()


def backward(loss: Value) -> None:
    """Reverse sweep from a scalar loss; fills grads and ParamStore.grads.

    Every node touched by the sweep gets its adjoint; all remaining nodes get
    an explicit zero gradient. Pending injected adjoints are consumed.
    """
    if loss.data.shape != (1, 1):
        raise NonScalarLossError(f"loss must be 1x1, got {loss.data.shape}")
    tape = loss.tape
    nodes = tape._nodes
    adjoint: list[np.ndarray | None] = [None] * len(nodes)
    for node_id, g in tape._pending.items():
        adjoint[node_id] = g.copy()
    tape._pending.clear()
    seed = np.ones((1, 1))
    adjoint[loss.node_id] = seed if adjoint[loss.node_id] is None else adjoint[loss.node_id] + seed

    for node_id in range(len(nodes) - 1, -1, -1):
        g = adjoint[node_id]
        node = nodes[node_id]
        if g is None:
            node.grad = np.zeros_like(node.data)
            continue
        node.grad = g
        for parent_id, vjp in node.parents:
            contribution = vjp(g)
            if adjoint[parent_id] is None:
                adjoint[parent_id] = contribution.copy()
            else:
                adjoint[parent_id] = adjoint[parent_id] + contribution
        if node.owner is not None:
            store, name = node.owner
            store.grads[name] += g


# --- parameters, Adam, checkpointing -----------------------------------------

_CHECKPOINT_MAGIC = "CURVO-CHECKPOINT 1"


class ParamStore:
    """Named trainable matrices with per-parameter Adam state.

    Parameter arrays are the single source of truth across training steps;
    ``leaf`` re-registers them on a fresh tape each step without copying.
    """

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._moment1: dict[str, np.ndarray] = {}
        self._moment2: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, array) -> None:
        if name in self.params:
            raise ValueError(f"parameter {name!r} already exists")
        arr = np.array(array, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"parameter {name!r} must be 2-D, got shape {arr.shape}")
        self.params[name] = arr
        self.grads[name] = np.zeros_like(arr)
        self._moment1[name] = np.zeros_like(arr)
        self._moment2[name] = np.zeros_like(arr)

    def names(self):
        return list(self.params)

    def leaf(self, tape: Tape, name: str) -> Value:
        key = (id(self), name)
        if key not in tape._param_leaves:
            tape._param_leaves[key] = tape.leaf(self.params[name], owner=(self, name))
        return tape._param_leaves[key]

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def grad_norm(self) -> float:
        total = 0.0
        for g in self.grads.values():
            total += float(np.sum(g * g))
        return float(np.sqrt(total))

    def scale_grads(self, factor: float) -> None:
        for g in self.grads.values():
            g *= factor

    def save(self, path) -> None:
        """Textual checkpoint: magic header, then name/shape/row-major values."""
        with open(path, "w") as f:
            f.write(f"{_CHECKPOINT_MAGIC}\n")
            f.write(f"params {len(self.params)}\n")
            for name in self.params:
                arr = self.params[name]
                f.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
                f.write(" ".join(repr(float(v)) for v in arr.reshape(-1)))
                f.write("\n")

    @classmethod
    def load(cls, path) -> "ParamStore":
        store = cls()
        with open(path) as f:
            if f.readline().strip() != _CHECKPOINT_MAGIC:
                raise ValueError(f"{path}: not a recognized checkpoint file")
            count = int(f.readline().split()[1])
            for _ in range(count):
                name, rows, cols = f.readline().split()
                values = np.array([float(v) for v in f.readline().split()])
                store.add(name, values.reshape(int(rows), int(cols)))
        return store


def adam_step(store: ParamStore, lr: float, beta1=0.9, beta2=0.999, eps=1e-8) -> None:
    """Standard bias-corrected Adam update; zeroes the gradients afterwards."""
    store.step_count += 1
    t = store.step_count
    for name, param in store.params.items():
        g = store.grads[name]
        m = store._moment1[name]
        v = store._moment2[name]
        m[...] = beta1 * m + (1.0 - beta1) * g
        v[...] = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        param -= lr * m_hat / (np.sqrt(v_hat) + eps)
    store.zero_grads()
