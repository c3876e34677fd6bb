"""Referenced similarity: pooled word vectors compared by cosine."""

from __future__ import annotations

import math

import numpy as np

from .corpus import Utterance
from .vocabulary import Vocabulary


def pool(utterance: Utterance, vocab: Vocabulary, matrix: np.ndarray) -> np.ndarray:
    """Element-wise max pooling concatenated with min pooling.

    Keeps the most extreme value of every embedding dimension across the
    utterance, in both directions, yielding a 2*dim sentence vector.
    An empty utterance pools to the zero vector.
    """
    dim = matrix.shape[1]
    if not utterance:
        return np.zeros(2 * dim)
    rows = matrix[[vocab.id_of(tok) for tok in utterance]]
    return np.concatenate([rows.max(axis=0), rows.min(axis=0)])


def referenced_score(
    groundtruth: Utterance,
    candidate: Utterance,
    vocab: Vocabulary,
    matrix: np.ndarray,
) -> float:
    """Cosine similarity between the pooled vectors of both utterances.

    Returns 0.0 when either pooled vector has zero norm.
    """
    gvec = pool(groundtruth, vocab, matrix)
    cvec = pool(candidate, vocab, matrix)
    gnorm = math.sqrt(float(gvec @ gvec))
    cnorm = math.sqrt(float(cvec @ cvec))
    if gnorm == 0.0 or cnorm == 0.0:
        return 0.0
    return float(gvec @ cvec) / (gnorm * cnorm)
