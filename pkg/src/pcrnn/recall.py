"""Seeded free-running generation and recall scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary, one_hot
from .metrics import levenshtein
from .network import NetworkParams, forward, zero_state

FEEDBACK_MODES = ("raw", "onehot")
DEFAULT_SEED_LENGTH = 10


@dataclass(frozen=True)
class RecallResult:
    generated: str
    edit_distance: int
    seed_length: int
    feedback_mode: str


def seed_and_generate(params: NetworkParams, corpus: str, vocab: Vocabulary,
                      seed_length: int = DEFAULT_SEED_LENGTH,
                      feedback_mode: str = "raw") -> RecallResult:
    """Teacher-force the first ``seed_length`` characters, then free-run.

    After the seed the character input slot receives the network's own
    previous output: the raw softmax activations ("raw") or the one-hot of
    their argmax ("onehot").  Decoding of the generated stream is always
    argmax.  Output length equals the corpus length and starts with the seed
    verbatim; the edit distance is against the full corpus.
    """
    if feedback_mode not in FEEDBACK_MODES:
        raise ValueError(f"unknown feedback mode {feedback_mode!r}")
    length = len(corpus)
    if not 0 < seed_length < length:
        raise ValueError("seed length must be in (0, corpus length)")
    size = len(vocab)
    state = zero_state(params.dims)
    generated = list(corpus[:seed_length])
    char_vec = None
    # Steps 0..seed_length-1 consume ground-truth characters; the remaining
    # steps consume the model's own previous prediction.
    for t in range(length - 1):
        if t < seed_length:
            char_vec = one_hot(vocab.index_of[corpus[t]], size)
        elif feedback_mode == "raw":
            char_vec = state.output
        else:
            char_vec = one_hot(int(np.argmax(state.output)), size)
        state = forward(params, char_vec, state)
        if t >= seed_length - 1:
            generated.append(vocab.chars[int(np.argmax(state.output))])
    text = "".join(generated)
    return RecallResult(generated=text,
                        edit_distance=levenshtein(text, corpus),
                        seed_length=seed_length,
                        feedback_mode=feedback_mode)


def recall_report(result: RecallResult, path) -> None:
    """Write the generated text verbatim plus an edit-distance trailer."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.generated)
        fh.write(f"\nedit_distance={result.edit_distance}\n")


def parse_recall_report(path) -> tuple[str, int]:
    text = open(path, encoding="utf-8").read()
    body, _, trailer = text.rstrip("\n").rpartition("\n")
    key, _, value = trailer.partition("=")
    if key != "edit_distance":
        raise ValueError(f"{path}: missing edit_distance trailer")
    return body, int(value)
