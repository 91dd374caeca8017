"""Swapped-prediction prototype loss and the time-contrastive loss."""

from __future__ import annotations

import numpy as np

from .. import tensor as T


def prototype_loss(p_a: T.Tensor, q_a, p_b: T.Tensor, q_b) -> T.Tensor:
    """Average cross entropy of each view's prediction against the other
    view's assignment codes. The codes enter as constants, so no gradient
    reaches the code path by construction."""
    ce_a = T.cross_entropy(p_a, T.constant(np.asarray(q_a)))
    ce_b = T.cross_entropy(p_b, T.constant(np.asarray(q_b)))
    return T.mul(T.add(ce_a, ce_b), 0.5)


def sample_tcn_triplet(x: int, n_anchors: int, positive_window: int,
                       negative_window: int, n_negatives: int,
                       rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Pick a positive within +-positive_window of anchor x and negatives
    strictly outside +-negative_window, all inside [0, n_anchors]."""
    if not 0 <= x <= n_anchors:
        raise ValueError(f"anchor {x} outside [0, {n_anchors}]")
    if n_anchors <= 2 * negative_window:
        raise ValueError(
            f"need n_anchors > 2 * negative_window for negatives to exist "
            f"({n_anchors} <= {2 * negative_window})")
    lo = max(0, x - positive_window)
    hi = min(n_anchors, x + positive_window)
    positives = [y for y in range(lo, hi + 1) if y != x]
    if not positives:
        raise ValueError(f"no positive index within {positive_window} of {x}")
    y = positives[int(rng.integers(0, len(positives)))]
    candidates = np.concatenate([
        np.arange(0, max(0, x - negative_window)),
        np.arange(min(n_anchors, x + negative_window) + 1, n_anchors + 1),
    ]).astype(int)
    if candidates.size == 0:
        raise ValueError(f"no negative index farther than {negative_window} from {x}")
    negatives = candidates[rng.integers(0, candidates.size, size=n_negatives)]
    return y, negatives


def time_contrastive_loss(anchor_scores: T.Tensor, positive_scores: T.Tensor,
                          negative_scores: T.Tensor, temperature: float) -> T.Tensor:
    """InfoNCE over unnormalized prototype scores with dot-product similarity.

    anchor/positive: (batch, K); negatives: (batch, n_neg, K). The log-sum-
    exp is shifted by a detached per-row max for stability; the shift
    cancels in both value and gradient.
    """
    batch, k = anchor_scores.shape
    pos_sim = T.tsum(T.mul(anchor_scores, positive_scores), axis=-1, keepdims=True)
    anchor_wide = T.reshape(anchor_scores, (batch, 1, k))
    neg_sim = T.tsum(T.mul(anchor_wide, negative_scores), axis=-1)
    logits = T.mul(T.concat([pos_sim, neg_sim], axis=1), 1.0 / temperature)
    shift = T.constant(logits.data.max(axis=1, keepdims=True))
    lse = T.add(T.log(T.tsum(T.exp(T.sub(logits, shift)), axis=1, keepdims=True)), shift)
    pos_logit = T.gather(logits, [0], axis=1)
    return T.mean(T.sub(lse, pos_logit))
