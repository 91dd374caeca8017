"""Learnable unit-norm prototype vectors and score projection."""

from __future__ import annotations

import numpy as np

from .. import tensor as T
from ..nn import Module


class PrototypeBank(Module):
    """K unit-norm vectors acting as cluster anchors in skill space.

    Implemented as a bias-free linear map; rows are renormalized to unit
    length after every optimizer step so scores stay cosine similarities.
    """

    def __init__(self, n_prototypes: int, skill_dim: int, rng: np.random.Generator):
        super().__init__()
        vectors = rng.normal(0.0, 1.0, size=(n_prototypes, skill_dim))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        self.vectors = self.register("vectors", vectors)
        self.n_prototypes = n_prototypes
        self.skill_dim = skill_dim

    def renormalize(self) -> None:
        norms = np.linalg.norm(self.vectors.data, axis=1, keepdims=True)
        self.vectors.data = self.vectors.data / norms

    def project(self, z: T.Tensor) -> T.Tensor:
        """Scores s_k = <z/||z||, c_k> for a batch of skill vectors."""
        z_normed = T.l2_normalize(z)
        return T.matmul(z_normed, T.transpose(self.vectors))

    def project_np(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        norms = np.linalg.norm(z, axis=-1, keepdims=True)
        if np.any(norms < 1e-12):
            raise ValueError("project: zero-norm skill vector")
        return (z / norms) @ self.vectors.data.T


def project_scores(z, bank: PrototypeBank) -> T.Tensor:
    """Project skill vectors onto the bank; entries lie in [-1, 1]."""
    return bank.project(z if isinstance(z, T.Tensor) else T.Tensor(z))


def prototype_probs(scores, temperature: float) -> T.Tensor:
    """Softmax over prototypes at the given temperature."""
    scores = scores if isinstance(scores, T.Tensor) else T.Tensor(scores)
    return T.softmax(scores, temperature=temperature, axis=-1)
