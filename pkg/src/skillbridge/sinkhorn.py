"""Entropy-regularized soft assignment of samples to prototypes.

Given a sample-by-prototype score matrix, alternating row/column scaling
drives exp(scores/epsilon) toward a transport plan with uniform marginals:
every prototype receives mass 1/K per batch and every sample carries mass
1/B. The returned codes are the plan's columns renormalized so each
sample's assignment sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Assignment:
    """Soft assignment codes, one distribution over prototypes per sample."""

    codes: np.ndarray  # (batch, prototypes); each row sums to 1
    epsilon: float
    iterations: int


def sinkhorn_knopp(scores: np.ndarray, epsilon: float, iterations: int) -> Assignment:
    """Run Sinkhorn-Knopp scaling on a (batch, prototypes) score matrix.

    The per-matrix maximum is subtracted before exponentiation so large
    score/epsilon ratios cannot overflow; the subsequent global
    normalization makes the shift exact rather than approximate.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"scores must be 2-d, got shape {scores.shape}")
    batch, n_proto = scores.shape
    if batch < 1 or n_proto < 2:
        raise ValueError(f"need batch >= 1 and prototypes >= 2, got {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores contain non-finite entries")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    q = np.exp((scores - scores.max()) / epsilon).T  # (prototypes, batch)
    q /= q.sum()
    row_target = 1.0 / n_proto
    col_target = 1.0 / batch
    for _ in range(iterations):
        q *= (row_target / q.sum(axis=1))[:, None]
        q *= (col_target / q.sum(axis=0))[None, :]
    q /= q.sum(axis=0, keepdims=True)
    return Assignment(codes=q.T, epsilon=epsilon, iterations=iterations)


def target_codes(z_batch: np.ndarray, prototypes: np.ndarray,
                 epsilon: float, iterations: int) -> np.ndarray:
    """Assignment codes for unit-norm skill vectors against unit-norm prototypes.

    Operates on plain arrays: the codes are training targets and must not
    carry gradients back into either input.
    """
    z = np.asarray(z_batch, dtype=np.float64)
    c = np.asarray(prototypes, dtype=np.float64)
    for name, mat in (("z_batch", z), ("prototypes", c)):
        norms = np.linalg.norm(mat, axis=-1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError(f"{name} rows must be unit-norm")
    scores = z @ c.T
    return sinkhorn_knopp(scores, epsilon, iterations).codes
