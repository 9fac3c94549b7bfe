"""Scikit-learn style estimator facade over the training engines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import baseline, clones, corpus, recall
from .metrics import sum_over_history


def _as_text(X) -> str:
    """Accept a string, or any length-1 sequence holding one string."""
    if isinstance(X, str):
        text = X
    elif hasattr(X, "__len__") and len(X) == 1 and isinstance(X[0], str):
        text = X[0]
    else:
        raise ValueError("expected a single training string")
    if not text:
        raise ValueError("empty training text")
    return text


class SequenceMemorizer(BaseEstimator):
    """Character-level recurrent memorizer with parallel-clones training.

    Parameters
    ----------
    method : "clones" trains with phase-offset weight-shared clones and
        averaged gradients; "regular" is plain online gradient descent.
    n_clones : clone count; None picks L-1 (one clone per transition), the
        densest phase coverage.  For the regular method this sets the
        non-active measurement clone count.
    """

    def __init__(self, method="clones", n_clones=None, iterations=100,
                 learning_rate=1.0, hidden=clones.HIDDEN_WIDTH,
                 random_state=0, threads=1,
                 seed_length=recall.DEFAULT_SEED_LENGTH, feedback="raw"):
        self.method = method
        self.n_clones = n_clones
        self.iterations = iterations
        self.learning_rate = learning_rate
        self.hidden = hidden
        self.random_state = random_state
        self.threads = threads
        self.seed_length = seed_length
        self.feedback = feedback

    def fit(self, X, y=None):
        text = _as_text(X)
        if self.method not in ("clones", "regular"):
            raise ValueError(f"unknown method {self.method!r}")
        self.corpus_ = text
        self.vocab_ = corpus.build_vocabulary(text)
        seq = corpus.encode(text, self.vocab_)
        config = clones.RunConfig(
            corpus_path="<memory>",
            n_clones=self.n_clones if self.n_clones is not None else len(text) - 1,
            iterations=self.iterations,
            lr=self.learning_rate,
            rng_seed=self.random_state,
            thread_count=self.threads,
            hidden=self.hidden,
        )
        train = (clones.train_target if self.method == "clones"
                 else baseline.train_regular)
        self.params_, self.loss_surface_ = train(config, seq, len(self.vocab_))
        self.sum_loss_ = sum_over_history(self.loss_surface_)
        return self

    def generate(self):
        """Free-run from the corpus seed; returns the full RecallResult."""
        self._check_fitted()
        return recall.seed_and_generate(self.params_, self.corpus_,
                                        self.vocab_, self.seed_length,
                                        self.feedback)

    def predict(self, X=None):
        """Generated character sequence (seed plus free-running continuation)."""
        return self.generate().generated

    def score(self, X=None, y=None):
        """Recall accuracy: 1 - edit_distance / corpus length."""
        result = self.generate()
        return 1.0 - result.edit_distance / len(self.corpus_)

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise RuntimeError("estimator is not fitted; call fit() first")
