"""Learned unreferenced relatedness scorer: model, training, persistence."""

from .checkpoint import (
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
    vocab_content_hash,
)
from .config import TrainConfig
from .gradients import Gradients, batch_loss, compute_gradients, margin_loss
from .scorer import (
    BiGruEncoder,
    GruParams,
    ScorerParams,
    encode,
    gru_step,
    init_scorer_params,
    score_with_cache,
    sigmoid,
    unreferenced_score,
    zero_scorer_params,
)
from .training import (
    AdamState,
    EpochStats,
    TrainingLog,
    adam_step,
    sample_negative,
    train,
)

__all__ = [
    "AdamState",
    "BiGruEncoder",
    "Checkpoint",
    "EpochStats",
    "Gradients",
    "GruParams",
    "ScorerParams",
    "TrainConfig",
    "TrainingLog",
    "adam_step",
    "batch_loss",
    "compute_gradients",
    "encode",
    "gru_step",
    "init_scorer_params",
    "load_checkpoint",
    "margin_loss",
    "sample_negative",
    "save_checkpoint",
    "score_with_cache",
    "sigmoid",
    "train",
    "unreferenced_score",
    "vocab_content_hash",
    "zero_scorer_params",
]
