"""Parallel-clones training engine.

N replicas share one weight set and sweep the circular training sequence at
distinct phase offsets.  At each sweep step every clone computes a single-step
gradient from its own recurrent state; the gradients are averaged and applied
once to the shared weights.

Determinism: clones are processed in fixed-size chunks and the per-chunk
partial sums are reduced in ascending chunk order.  The chunk boundaries do
not depend on the worker count, so any --threads value yields bitwise
identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import one_hot_matrix
from .network import (
    DivergenceError,
    Dimensions,
    NetworkParams,
    forward_batch,
    gradient_batch,
    init_params,
    LOG_CLAMP,
)

HIDDEN_WIDTH = 256   # hidden layer width used for all experiments
CHUNK = 128          # clones per reduction chunk; fixed for reproducibility


@dataclass
class RunConfig:
    """All experiment knobs."""

    corpus_path: str | Path
    n_clones: int = 499
    iterations: int = 100
    lr: float = 1.0
    rng_seed: int = 0
    thread_count: int = 1
    out_dir: str | Path | None = None
    checkpoint_every: int = 0     # 0 disables periodic checkpoints
    measure_every_step: bool = False
    hidden: int = HIDDEN_WIDTH

    def validate(self, seq_length: int) -> None:
        if self.n_clones < 1 or self.n_clones > seq_length - 1:
            raise ValueError(
                f"clone count must be in [1, {seq_length - 1}], got {self.n_clones}"
            )
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.thread_count < 1:
            raise ValueError("thread count must be >= 1")


def clone_indices(n: int, q: int, length: int) -> tuple[int, int]:
    """1-based (input, target) sequence positions for clone n at sweep step q.

    input = 1 + mod(n+q-2, L); target = 1 + mod(n+q-1, L).  The sweep is
    circular, so clone phases wrap around the end of the sequence.
    """
    return 1 + (n + q - 2) % length, 1 + (n + q - 1) % length


def phase_offsets(n_clones: int, length: int) -> np.ndarray:
    """0-based starting offsets, evenly spaced when fewer clones than L-1."""
    spacing = 1 if n_clones == length - 1 else length // n_clones
    return (np.arange(n_clones) * spacing) % length


@dataclass
class CloneBank:
    """Batched recurrent state: one row per clone, plus each clone's phase."""

    phases: np.ndarray   # (N,) 0-based offsets into the sequence
    hidden: np.ndarray   # (N, hidden)
    output: np.ndarray   # (N, vocab)

    @classmethod
    def zeroed(cls, n_clones: int, length: int, dims: Dimensions) -> "CloneBank":
        return cls(
            phases=phase_offsets(n_clones, length),
            hidden=np.zeros((n_clones, dims.hidden)),
            output=np.zeros((n_clones, dims.vocab)),
        )

    @property
    def n(self) -> int:
        return len(self.phases)

    def reset(self) -> None:
        self.hidden[:] = 0.0
        self.output[:] = 0.0

    def step_indices(self, q: int, length: int) -> tuple[np.ndarray, np.ndarray]:
        """0-based (input, target) positions for every clone at step q."""
        inp = (self.phases + q - 1) % length
        return inp, (inp + 1) % length


def _chunks(n: int):
    return [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]


def sweep_step(params: NetworkParams, bank: CloneBank, onehots: np.ndarray,
               seq: np.ndarray, q: int, lr: float,
               pool: ThreadPoolExecutor | None = None) -> float:
    """One synchronized step: per-clone gradients, averaged update, new states.

    Returns the mean per-clone cross-entropy, measured with the pre-update
    weights (the same forward pass that produced the gradients).
    """
    length = len(seq)
    in_idx, tgt_idx = bank.step_indices(q, length)
    inputs = np.concatenate([onehots[in_idx], bank.hidden, bank.output], axis=1)
    targets = seq[tgt_idx]
    spans = _chunks(bank.n)

    def work(span):
        a, b = span
        return gradient_batch(params, inputs[a:b], targets[a:b])

    if pool is None or len(spans) == 1:
        results = [work(s) for s in spans]
    else:
        results = list(pool.map(work, spans))

    # Fixed-order reduction over chunks, independent of worker scheduling.
    total, loss_sum = None, 0.0
    for (a, b), (grads, losses, h, p) in zip(spans, results):
        if total is None:
            total = grads
        else:
            total.add_(grads)
        loss_sum += float(losses.sum())
        bank.hidden[a:b] = h
        bank.output[a:b] = p

    avg = total.scale(1.0 / bank.n)
    if not avg.all_finite():
        raise DivergenceError(f"non-finite averaged gradient at sweep step {q}")
    params.subtract_scaled(avg, lr)
    if not params.all_finite():
        raise DivergenceError(f"non-finite parameters after sweep step {q}")
    return loss_sum / bank.n


def loss_sweep(params: NetworkParams, bank: CloneBank, onehots: np.ndarray,
               seq: np.ndarray, pool: ThreadPoolExecutor | None = None) -> np.ndarray:
    """Forward-only full sweep: mean loss per step, no weight updates.

    Used by the non-active measurement clones of the baseline run.
    """
    length = len(seq)
    bank.reset()
    record = np.empty(length - 1)
    for q in range(1, length):
        in_idx, tgt_idx = bank.step_indices(q, length)
        inputs = np.concatenate([onehots[in_idx], bank.hidden, bank.output], axis=1)
        targets = seq[tgt_idx]
        spans = _chunks(bank.n)

        def work(span):
            a, b = span
            h, p = forward_batch(params, inputs[a:b])
            losses = -np.log(np.maximum(p[np.arange(b - a), targets[a:b]], LOG_CLAMP))
            return losses, h, p

        if pool is None or len(spans) == 1:
            results = [work(s) for s in spans]
        else:
            results = list(pool.map(work, spans))

        loss_sum = 0.0
        for (a, b), (losses, h, p) in zip(spans, results):
            loss_sum += float(losses.sum())
            bank.hidden[a:b] = h
            bank.output[a:b] = p
        record[q - 1] = loss_sum / bank.n
    return record


def full_sweep(params: NetworkParams, seq: np.ndarray, vocab_size: int,
               n_clones: int, lr: float,
               pool: ThreadPoolExecutor | None = None,
               onehots: np.ndarray | None = None) -> np.ndarray:
    """One full-sweep iteration (q = 1 .. L-1) from freshly zeroed histories.

    Updates ``params`` in place and returns the mean loss per step, i.e. the
    loss at history level h = q - 1.
    """
    length = len(seq)
    if onehots is None:
        onehots = one_hot_matrix(seq, vocab_size)
    dims = Dimensions(vocab=vocab_size, hidden=params.dims.hidden)
    bank = CloneBank.zeroed(n_clones, length, dims)
    record = np.empty(length - 1)
    for q in range(1, length):
        record[q - 1] = sweep_step(params, bank, onehots, seq, q, lr, pool)
    return record


def train_target(config: RunConfig, seq: np.ndarray, vocab_size: int,
                 on_iteration=None) -> tuple[NetworkParams, np.ndarray]:
    """Run the parallel-clones trainer for ``config.iterations`` full sweeps.

    Returns the final params and the loss surface (iterations x L-1).
    ``on_iteration(i, record, params)`` fires after each sweep, 1-based.
    """
    config.validate(len(seq))
    dims = Dimensions(vocab=vocab_size, hidden=config.hidden)
    params = init_params(dims, config.rng_seed)
    onehots = one_hot_matrix(seq, vocab_size)
    rows = []
    pool = (ThreadPoolExecutor(config.thread_count)
            if config.thread_count > 1 else None)
    try:
        for i in range(1, config.iterations + 1):
            record = full_sweep(params, seq, vocab_size, config.n_clones,
                                config.lr, pool, onehots)
            rows.append(record)
            if on_iteration is not None:
                on_iteration(i, record, params)
    finally:
        if pool is not None:
            pool.shutdown()
    return params, np.vstack(rows)
