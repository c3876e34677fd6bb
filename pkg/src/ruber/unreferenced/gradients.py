"""Margin ranking objective and hand-derived backpropagation.

The loss for one (query, good reply, bad reply) triple is
``max(0, margin - s(q, r_good) + s(q, r_bad))``.  Gradients are
accumulated analytically: logistic and tanh derivatives through the MLP
head, product rules through the bilinear match feature, and
back-propagation through time through both directions of both GRU
encoders.  Samples whose loss clamps to zero contribute exactly nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from .config import TrainConfig
from .scorer import (
    BiGruEncoder,
    GruParams,
    ScoreCache,
    ScorerParams,
    _score_internal,
    score_with_cache,
    zero_scorer_params,
)

# A training sample: (query, positive_reply, negative_reply), each a token list.
Triple = tuple[list, list, list]


def margin_loss(s_pos: float, s_neg: float, margin: float) -> float:
    """Hinge on the score gap: zero once s_pos beats s_neg by ``margin``."""
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    return max(0.0, margin - s_pos + s_neg)


@dataclass
class Gradients:
    """d(mean loss)/d(tensor) for every scorer tensor.

    ``embeddings`` is a (V, d) matrix of input-vector gradients when
    fine-tuning is on, else None.
    """

    scorer: ScorerParams
    embeddings: np.ndarray | None = None


def batch_loss(
    batch: list[Triple],
    params: ScorerParams,
    vocab,
    matrix: np.ndarray,
    config: TrainConfig,
) -> float:
    """Mean margin loss over ``batch`` (forward passes only)."""
    if not batch:
        raise ValueError("batch must not be empty")
    total = 0.0
    for query, pos, neg in batch:
        s_pos, _ = _score_internal(query, pos, params, vocab, matrix, config.max_len, False)
        s_neg, _ = _score_internal(query, neg, params, vocab, matrix, config.max_len, False)
        total += margin_loss(s_pos, s_neg, config.margin)
    return total / len(batch)


def compute_gradients(
    batch: list[Triple],
    params: ScorerParams,
    vocab,
    matrix: np.ndarray,
    config: TrainConfig,
) -> tuple[Gradients, float]:
    """Analytic gradients of the mean margin loss over ``batch``.

    Returns ``(gradients, mean_loss)``; embedding gradients are included
    only when ``config.fine_tune_embeddings`` is set.  Raises
    :class:`~ruber.errors.NumericalError` if the loss goes non-finite.
    """
    if not batch:
        raise ValueError("batch must not be empty")
    grads = zero_scorer_params(params.embed_dim, params.hidden_size, params.mlp_size)
    emb_grad = np.zeros_like(matrix) if config.fine_tune_embeddings else None

    total = 0.0
    for index, (query, pos, neg) in enumerate(batch):
        s_pos, cache_pos = score_with_cache(query, pos, params, vocab, matrix, config.max_len)
        s_neg, cache_neg = score_with_cache(query, neg, params, vocab, matrix, config.max_len)
        if not (math.isfinite(s_pos) and math.isfinite(s_neg)):
            raise NumericalError(
                f"non-finite score at batch index {index}: "
                f"s_pos={s_pos!r} s_neg={s_neg!r}"
            )
        loss = margin_loss(s_pos, s_neg, config.margin)
        total += loss
        if loss > 0.0:
            _backward_score(cache_pos, -1.0, params, grads, emb_grad)
            _backward_score(cache_neg, +1.0, params, grads, emb_grad)

    if not math.isfinite(total):
        raise NumericalError(f"margin loss went non-finite over a batch of {len(batch)}")

    scale = 1.0 / len(batch)
    for _, arr in grads.tensors():
        arr *= scale
    if emb_grad is not None:
        emb_grad *= scale
    return Gradients(scorer=grads, embeddings=emb_grad), total * scale


def _backward_score(
    cache: ScoreCache,
    upstream: float,
    params: ScorerParams,
    grads: ScorerParams,
    emb_grad: np.ndarray | None,
) -> None:
    """Accumulate d(upstream * score)/d(params) into ``grads``."""
    s = cache.score
    dz = upstream * s * (1.0 - s)          # logistic derivative
    grads.mlp_out_b += dz
    grads.mlp_out_w += dz * cache.hidden
    dhidden = dz * params.mlp_out_w
    dpre = dhidden * (1.0 - cache.hidden ** 2)  # tanh derivative
    grads.mlp_hidden_b += dpre
    grads.mlp_hidden_w += np.outer(dpre, cache.feats)
    dfeats = params.mlp_hidden_w.T @ dpre

    two_h = cache.query.vec.shape[0]
    qvec, rvec = cache.query.vec, cache.reply.vec
    dquad = dfeats[-1]
    dq = dfeats[:two_h] + dquad * (params.bilinear @ rvec)
    dr = dfeats[two_h:2 * two_h] + dquad * (params.bilinear.T @ qvec)
    grads.bilinear += dquad * np.outer(qvec, rvec)

    _backward_encode(cache.query, dq, params.query_encoder, grads.query_encoder, emb_grad)
    _backward_encode(cache.reply, dr, params.reply_encoder, grads.reply_encoder, emb_grad)


def _backward_encode(
    ecache,
    dvec: np.ndarray,
    encoder: BiGruEncoder,
    gencoder: BiGruEncoder,
    emb_grad: np.ndarray | None,
) -> None:
    hidden = encoder.hidden_size
    needs_dx = emb_grad is not None
    dxs = np.zeros_like(ecache.fwd.xs) if needs_dx else None
    _backward_direction(ecache.fwd, dvec[:hidden], encoder.forward, gencoder.forward, dxs)
    # the backward direction consumed the reversed sequence, so its input
    # gradients land on reversed rows
    dxs_view = dxs[::-1] if needs_dx else None
    _backward_direction(ecache.bwd, dvec[hidden:], encoder.backward, gencoder.backward, dxs_view)
    if needs_dx:
        # np.add.at so repeated token ids accumulate instead of overwrite
        np.add.at(emb_grad, ecache.ids, dxs)


def _backward_direction(
    dcache,
    dh_last: np.ndarray,
    p: GruParams,
    gp: GruParams,
    dxs: np.ndarray | None,
) -> None:
    dh = np.array(dh_last)
    for t in range(len(dcache.steps) - 1, -1, -1):
        h_prev, reset, update, cand = dcache.steps[t]
        x_t = dcache.xs[t]

        dcand = dh * update
        dupdate = dh * (cand - h_prev)
        dh_prev = dh * (1.0 - update)

        dc = dcand * (1.0 - cand ** 2)
        gp.w_cand += np.outer(dc, x_t)
        gp.b_cand += dc
        gp.u_cand += np.outer(dc, reset * h_prev)
        drh = p.u_cand.T @ dc
        dreset = drh * h_prev
        dh_prev = dh_prev + drh * reset

        da = np.concatenate([
            dreset * reset * (1.0 - reset),
            dupdate * update * (1.0 - update),
        ])
        gp.w_gates += np.outer(da, x_t)
        gp.b_gates += da
        gp.u_gates += np.outer(da, h_prev)
        dh_prev = dh_prev + p.u_gates.T @ da

        if dxs is not None:
            dxs[t] += p.w_gates.T @ da + p.w_cand.T @ dc
        dh = dh_prev
    # the gradient w.r.t. the initial zero state is discarded
