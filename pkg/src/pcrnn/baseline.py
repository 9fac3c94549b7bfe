"""Regular online-gradient-descent baseline with non-active measurement clones.

The baseline trains with plain sequential online updates (no clone averaging).
For comparable loss surfaces it is instrumented with a bank of non-active
clones that share its weights and sweep the circular sequence exactly like the
parallel clones, but never contribute updates.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .corpus import one_hot_matrix
from .clones import CloneBank, RunConfig, loss_sweep
from .network import (
    ActivationState,
    Dimensions,
    NetworkParams,
    init_params,
    step_gradient,
    zero_state,
)


def regular_sweep(params: NetworkParams, seq: np.ndarray, vocab_size: int,
                  lr: float, onehots: np.ndarray | None = None) -> np.ndarray:
    """One non-circular pass: update after every step, state carried forward.

    Recurrent history is zeroed at the start of the sweep.  Updates ``params``
    in place; returns the per-step losses (length L-1).
    """
    if onehots is None:
        onehots = one_hot_matrix(seq, vocab_size)
    dims = Dimensions(vocab=vocab_size, hidden=params.dims.hidden)
    state = zero_state(dims)
    losses = np.empty(len(seq) - 1)
    for t in range(len(seq) - 1):
        grads, loss, state = step_gradient(params, onehots[t], state,
                                           int(seq[t + 1]))
        params.subtract_scaled(grads, lr)
        losses[t] = loss
    return losses


def measure_with_nonactive_clones(params: NetworkParams, seq: np.ndarray,
                                  vocab_size: int, n_clones: int,
                                  pool: ThreadPoolExecutor | None = None,
                                  onehots: np.ndarray | None = None) -> np.ndarray:
    """Mean loss per history level under frozen params; read-only on params."""
    if onehots is None:
        onehots = one_hot_matrix(seq, vocab_size)
    dims = Dimensions(vocab=vocab_size, hidden=params.dims.hidden)
    bank = CloneBank.zeroed(n_clones, len(seq), dims)
    return loss_sweep(params, bank, onehots, seq, pool)


def train_regular(config: RunConfig, seq: np.ndarray, vocab_size: int,
                  on_iteration=None) -> tuple[NetworkParams, np.ndarray]:
    """Train the regular model; measure a loss-surface row per iteration.

    With ``config.measure_every_step`` a full non-active measurement sweep
    runs after every single update and the recorded row is the mean over the
    sweep's measurements; this is literal but costs L-1 measurement sweeps per
    iteration, so it is only practical on small corpora.  The default measures
    once per iteration on the post-sweep weights.
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
            if config.measure_every_step:
                row = _sweep_measuring_every_step(params, seq, vocab_size,
                                                 config, onehots, pool)
            else:
                regular_sweep(params, seq, vocab_size, config.lr, onehots)
                row = measure_with_nonactive_clones(params, seq, vocab_size,
                                                    config.n_clones, pool,
                                                    onehots)
            rows.append(row)
            if on_iteration is not None:
                on_iteration(i, row, params)
    finally:
        if pool is not None:
            pool.shutdown()
    return params, np.vstack(rows)


def _sweep_measuring_every_step(params, seq, vocab_size, config, onehots, pool):
    dims = Dimensions(vocab=vocab_size, hidden=params.dims.hidden)
    state = zero_state(dims)
    measured = np.zeros(len(seq) - 1)
    for t in range(len(seq) - 1):
        grads, _, state = step_gradient(params, onehots[t], state,
                                        int(seq[t + 1]))
        params.subtract_scaled(grads, config.lr)
        measured += measure_with_nonactive_clones(params, seq, vocab_size,
                                                  config.n_clones, pool,
                                                  onehots)
    return measured / (len(seq) - 1)
