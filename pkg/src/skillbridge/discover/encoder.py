"""Temporal skill encoder: clip of observations -> skill vector."""

from __future__ import annotations

import numpy as np

from .. import tensor as T
from ..configs import EncoderConfig
from ..nn import MLP, Linear, Module, TransformerEncoder, sinusoidal_positions


class TemporalSkillEncoder(Module):
    """Per-frame MLP embeddings plus a learned summary token, run through a
    transformer encoder with fixed sinusoidal positions. The summary
    token's output, mapped through a linear head, is the (unnormalized)
    skill vector for the clip."""

    def __init__(self, obs_dim: int, clip_len: int, cfg: EncoderConfig,
                 rng: np.random.Generator):
        super().__init__()
        self.obs_dim = obs_dim
        self.clip_len = clip_len
        self.skill_dim = cfg.skill_dim
        self.frame_mlp = self.add_module(
            "frame_mlp", MLP([obs_dim, cfg.frame_hidden, cfg.skill_dim], rng))
        self.summary_token = self.register(
            "summary_token", rng.normal(0.0, 0.5, size=cfg.skill_dim))
        self.positions = sinusoidal_positions(clip_len + 1, cfg.skill_dim)
        self.encoder = self.add_module(
            "encoder", TransformerEncoder(cfg.skill_dim, cfg.heads, cfg.ff_dim, cfg.layers, rng))
        self.head = self.add_module("head", Linear(cfg.skill_dim, cfg.skill_dim, rng))

    def encode(self, clips: np.ndarray) -> T.Tensor:
        """Encode a batch of clips (batch, clip_len, obs_dim) -> (batch, skill_dim)."""
        clips = np.asarray(clips, dtype=np.float64)
        if clips.ndim != 3 or clips.shape[1] != self.clip_len or clips.shape[2] != self.obs_dim:
            raise T.ShapeError(
                f"encode: expected (batch, {self.clip_len}, {self.obs_dim}), got {clips.shape}")
        batch = clips.shape[0]
        flat = T.Tensor(clips.reshape(batch * self.clip_len, self.obs_dim))
        frames = T.reshape(self.frame_mlp(flat), (batch, self.clip_len, self.skill_dim))
        token = T.reshape(self.summary_token, (1, 1, self.skill_dim))
        tokens = T.add(token, T.constant(np.zeros((batch, 1, self.skill_dim))))
        sequence = T.concat([frames, tokens], axis=1)
        sequence = T.add(sequence, T.constant(self.positions))
        encoded = self.encoder(sequence)
        summary = T.reshape(T.gather(encoded, [self.clip_len], axis=1), (batch, self.skill_dim))
        return self.head(summary)

    def encode_np(self, clips: np.ndarray) -> np.ndarray:
        """Gradient-free encode returning a plain array."""
        with T.no_grad():
            return self.encode(clips).data
