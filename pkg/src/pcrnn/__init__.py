"""Parallel-clones training for character-level recurrent networks."""

__version__ = "0.1.0"

from .corpus import (
    Vocabulary,
    build_vocabulary,
    decode,
    encode,
    load_corpus,
    load_moby_excerpt,
    one_hot,
)
from .network import (
    ActivationState,
    Dimensions,
    DivergenceError,
    Gradients,
    NetworkParams,
    apply_update,
    cross_entropy,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
    step_gradient,
    zero_state,
)
from .clones import CloneBank, RunConfig, clone_indices, full_sweep, train_target
from .baseline import measure_with_nonactive_clones, regular_sweep, train_regular
from .metrics import (
    CorrelationResult,
    export_surface_csv,
    final_loss_vs_history,
    levenshtein,
    read_surface_csv,
    spearman,
    sum_over_history,
)
from .recall import RecallResult, recall_report, seed_and_generate
from .estimators import SequenceMemorizer

__all__ = [name for name in dir() if not name.startswith("_")]
