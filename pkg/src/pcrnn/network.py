"""Recurrent network core: forward pass, cross-entropy, single-step gradients.

The network maps a 2*vocab + hidden input (current character one-hot, plus the
previous step's hidden and output activations fed back) through one sigmoid
hidden layer to a softmax over the vocabulary.  Gradients are single-step:
the fed-back activations are treated as constants, so memory of history flows
forward through the activations but not backward through time.

All math is float64.  The batched helpers operate on stacks of states, one row
per network replica; the single-state API wraps a batch of one so that every
code path shares the same floating-point operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_CLAMP = 1e-15  # floor on predicted probability inside the loss
INIT_SCALE = 0.1   # weights drawn uniform on [-INIT_SCALE, INIT_SCALE]


class DivergenceError(FloatingPointError):
    """Raised when activations or gradients stop being finite."""


@dataclass(frozen=True)
class Dimensions:
    """Layer widths; the input layer is [char | prev hidden | prev output]."""

    vocab: int
    hidden: int

    @property
    def input_total(self) -> int:
        return 2 * self.vocab + self.hidden

    def __post_init__(self):
        if self.vocab < 1 or self.hidden < 1:
            raise ValueError("layer widths must be positive")


@dataclass
class NetworkParams:
    """The single shared weight set."""

    w_ih: np.ndarray  # (hidden, input_total)
    b_h: np.ndarray   # (hidden,)
    w_ho: np.ndarray  # (vocab, hidden)
    b_o: np.ndarray   # (vocab,)

    @property
    def dims(self) -> Dimensions:
        return Dimensions(vocab=self.w_ho.shape[0], hidden=self.w_ih.shape[0])

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.w_ih.copy(), self.b_h.copy(),
                             self.w_ho.copy(), self.b_o.copy())

    def arrays(self):
        return (self.w_ih, self.b_h, self.w_ho, self.b_o)

    def all_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())

    def subtract_scaled(self, grads: "Gradients", lr: float) -> None:
        """In-place p <- p - lr*g; shared by both trainers."""
        self.w_ih -= lr * grads.w_ih
        self.b_h -= lr * grads.b_h
        self.w_ho -= lr * grads.w_ho
        self.b_o -= lr * grads.b_o


@dataclass
class Gradients:
    """d(loss)/d(param), shape-matched to NetworkParams."""

    w_ih: np.ndarray
    b_h: np.ndarray
    w_ho: np.ndarray
    b_o: np.ndarray

    def arrays(self):
        return (self.w_ih, self.b_h, self.w_ho, self.b_o)

    def all_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())

    def scale(self, c: float) -> "Gradients":
        return Gradients(*(c * a for a in self.arrays()))

    def add_(self, other: "Gradients") -> None:
        for mine, theirs in zip(self.arrays(), other.arrays()):
            mine += theirs


@dataclass
class ActivationState:
    """One replica's recurrent activations from the previous step."""

    hidden: np.ndarray  # (hidden,)
    output: np.ndarray  # (vocab,)


def zero_state(dims: Dimensions) -> ActivationState:
    """The zeroed-history sentinel fed as recurrent input at sweep start.

    Deliberately not a valid softmax output; "zeroed" is taken literally.
    """
    return ActivationState(hidden=np.zeros(dims.hidden),
                           output=np.zeros(dims.vocab))


def init_params(dims: Dimensions, rng_seed: int) -> NetworkParams:
    """Seeded init: weights uniform on [-0.1, 0.1], biases zero."""
    rng = np.random.default_rng(rng_seed)
    return NetworkParams(
        w_ih=rng.uniform(-INIT_SCALE, INIT_SCALE, (dims.hidden, dims.input_total)),
        b_h=np.zeros(dims.hidden),
        w_ho=rng.uniform(-INIT_SCALE, INIT_SCALE, (dims.vocab, dims.hidden)),
        b_o=np.zeros(dims.vocab),
    )


def assemble_input(char_vec: np.ndarray, prev: ActivationState) -> np.ndarray:
    """Concatenate [character | previous hidden | previous output]."""
    return np.concatenate([char_vec, prev.hidden, prev.output])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward_batch(params: NetworkParams, inputs: np.ndarray):
    """Forward a stack of assembled input rows.

    Returns (hidden, output) with one row per input row.
    """
    h = _sigmoid(inputs @ params.w_ih.T + params.b_h)
    p = _softmax_rows(h @ params.w_ho.T + params.b_o)
    if not np.isfinite(p).all():
        raise DivergenceError("non-finite activations in forward pass")
    return h, p


def forward(params: NetworkParams, char_vec: np.ndarray,
            prev: ActivationState) -> ActivationState:
    """Single-replica forward step."""
    x = assemble_input(char_vec, prev)
    if x.shape[0] != params.dims.input_total:
        raise ValueError(
            f"input length {x.shape[0]} != expected {params.dims.input_total}"
        )
    h, p = forward_batch(params, x[np.newaxis, :])
    return ActivationState(hidden=h[0], output=p[0])


def cross_entropy(output: np.ndarray, target: int) -> float:
    """-ln p(target), with p clamped at 1e-15 to avoid infinities."""
    return float(-np.log(max(float(output[target]), LOG_CLAMP)))


def gradient_batch(params: NetworkParams, inputs: np.ndarray,
                   targets: np.ndarray):
    """Summed single-step gradients over a batch of replicas.

    Returns (grad_sums, losses, hidden, output).  ``grad_sums`` holds the sum
    over rows of each per-row gradient; callers divide by the batch size to
    average.  ``losses`` is the per-row cross-entropy vector.
    """
    n = inputs.shape[0]
    h, p = forward_batch(params, inputs)
    losses = -np.log(np.maximum(p[np.arange(n), targets], LOG_CLAMP))
    # Softmax + cross-entropy: d(loss)/d(logit) = p - onehot(target).
    dlogits = p.copy()
    dlogits[np.arange(n), targets] -= 1.0
    g_w_ho = dlogits.T @ h
    g_b_o = dlogits.sum(axis=0)
    dh = (dlogits @ params.w_ho) * h * (1.0 - h)
    g_w_ih = dh.T @ inputs
    g_b_h = dh.sum(axis=0)
    grads = Gradients(w_ih=g_w_ih, b_h=g_b_h, w_ho=g_w_ho, b_o=g_b_o)
    return grads, losses, h, p


def step_gradient(params: NetworkParams, char_vec: np.ndarray,
                  prev: ActivationState, target: int):
    """One replica's gradient, loss, and next activation state.

    The previous hidden/output activations are held constant during
    backpropagation (truncation depth 1).
    """
    x = assemble_input(char_vec, prev)[np.newaxis, :]
    grads, losses, h, p = gradient_batch(params, x, np.array([target]))
    if not grads.all_finite():
        raise DivergenceError("non-finite gradient")
    return grads, float(losses[0]), ActivationState(hidden=h[0], output=p[0])


def apply_update(params: NetworkParams, grads: Gradients,
                 lr: float) -> NetworkParams:
    """Gradient-descent update p - lr*g, returned as new params."""
    updated = params.copy()
    updated.subtract_scaled(grads, lr)
    if not updated.all_finite():
        raise DivergenceError("non-finite parameters after update")
    return updated


def save_checkpoint(params: NetworkParams, path) -> None:
    """Text checkpoint: magic line, dims line, then all values at 17 digits."""
    dims = params.dims
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("PCRNN 1\n")
        fh.write(f"{dims.vocab} {dims.hidden}\n")
        for arr in params.arrays():
            fh.write(" ".join(f"{v:.17g}" for v in arr.ravel()))
            fh.write("\n")


def load_checkpoint(path) -> NetworkParams:
    with open(path, encoding="utf-8") as fh:
        magic = fh.readline().strip()
        if magic != "PCRNN 1":
            raise ValueError(f"{path}: not a PCRNN checkpoint (magic {magic!r})")
        try:
            vocab, hidden = map(int, fh.readline().split())
            dims = Dimensions(vocab=vocab, hidden=hidden)
            values = np.array(fh.read().split(), dtype=np.float64)
        except ValueError as exc:
            raise ValueError(f"{path}: corrupt checkpoint: {exc}") from None
    shapes = [(dims.hidden, dims.input_total), (dims.hidden,),
              (dims.vocab, dims.hidden), (dims.vocab,)]
    total = sum(int(np.prod(s)) for s in shapes)
    if values.size != total:
        raise ValueError(
            f"{path}: expected {total} values, found {values.size}"
        )
    arrays, start = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(values[start:start + size].reshape(shape))
        start += size
    return NetworkParams(*arrays)
