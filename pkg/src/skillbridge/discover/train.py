"""Skill-discovery training loop over both embodiments' clip datasets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import tensor as T
from ..configs import AugmentConfig, DiscoveryConfig
from ..nn import Adam
from ..rng import stream
from ..sinkhorn import sinkhorn_knopp
from ..synthgym.data import Dataset, augment, sample_clip
from .encoder import TemporalSkillEncoder
from .losses import prototype_loss, sample_tcn_triplet, time_contrastive_loss
from .prototypes import PrototypeBank


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class DiscoveryResult:
    encoder: TemporalSkillEncoder
    bank: PrototypeBank
    log: list[dict] = field(default_factory=list)


def init_discovery_models(obs_dim: int, cfg: DiscoveryConfig,
                          seed: int) -> tuple[TemporalSkillEncoder, PrototypeBank]:
    encoder = TemporalSkillEncoder(obs_dim, cfg.clip_len, cfg.encoder,
                                   stream(seed, "discover/init-encoder"))
    bank = PrototypeBank(cfg.n_prototypes, cfg.encoder.skill_dim,
                         stream(seed, "discover/init-bank"))
    return encoder, bank


def train_discovery(dataset: Dataset, cfg: DiscoveryConfig, seed: int,
                    augment_cfg: AugmentConfig | None = None,
                    iteration_callback=None) -> DiscoveryResult:
    """Jointly train the encoder and prototype bank.

    Each iteration draws a batch of clips from a single embodiment, builds
    two augmented views, and optimizes the weighted sum of the swapped-
    prediction prototype loss and the time-contrastive loss. Prototype
    rows are renormalized after every step; the bank receives no updates
    during the initial freeze window.
    """
    cfg.validate()
    obs_dim = dataset.train_h[0].observations.shape[1]
    n_skills = dataset.manifest.n_skills
    encoder, bank = init_discovery_models(obs_dim, cfg, seed)
    optimizer = Adam(encoder.parameters() + bank.parameters(), lr=cfg.learning_rate)
    batch_rng = stream(seed, "discover/batches")
    aug_rng = stream(seed, "discover/augment")
    pools = {"h": dataset.train_h, "r": dataset.train_r}
    if not pools["h"] or not pools["r"]:
        raise ValueError("both embodiment datasets must be non-empty")

    aug_cfg = augment_cfg if augment_cfg is not None else AugmentConfig()
    log: list[dict] = []
    for iteration in range(cfg.iterations):
        embodiment = "h" if batch_rng.uniform() < 0.5 else "r"
        trajectories = pools[embodiment]
        traj_idx = batch_rng.integers(0, len(trajectories), size=cfg.batch_size)
        anchors = batch_rng.integers(0, cfg.n_anchors + 1, size=cfg.batch_size)

        def aug_clip(clip: np.ndarray) -> np.ndarray:
            return augment(clip, aug_cfg, aug_rng, n_skills)

        clips = [sample_clip(trajectories[ti], cfg.n_anchors, cfg.clip_len, int(a))
                 for ti, a in zip(traj_idx, anchors)]
        views = [np.stack([aug_clip(c) for c in clips]),
                 np.stack([aug_clip(c) for c in clips])]

        batch_blocks = [views[0], views[1]]
        if cfg.use_tcn_loss:
            pos_clips, neg_clips = [], []
            for ti, x in zip(traj_idx, anchors):
                y, negatives = sample_tcn_triplet(
                    int(x), cfg.n_anchors, cfg.positive_window,
                    cfg.negative_window, cfg.n_negatives, batch_rng)
                pos_clips.append(aug_clip(
                    sample_clip(trajectories[ti], cfg.n_anchors, cfg.clip_len, y)))
                for z in negatives:
                    neg_clips.append(aug_clip(
                        sample_clip(trajectories[ti], cfg.n_anchors, cfg.clip_len, int(z))))
            batch_blocks.append(np.stack(pos_clips))
            batch_blocks.append(np.stack(neg_clips))

        all_clips = np.concatenate(batch_blocks, axis=0)
        z_all = encoder.encode(all_clips)
        scores_all = bank.project(z_all)
        b = cfg.batch_size
        scores_a = T.gather(scores_all, np.arange(0, b), axis=0)
        scores_b = T.gather(scores_all, np.arange(b, 2 * b), axis=0)

        components: dict[str, float] = {}
        total = None
        if cfg.use_prototype_loss:
            codes_a = sinkhorn_knopp(scores_b.data, cfg.sinkhorn_epsilon,
                                     cfg.sinkhorn_iterations).codes
            codes_b = sinkhorn_knopp(scores_a.data, cfg.sinkhorn_epsilon,
                                     cfg.sinkhorn_iterations).codes
            p_a = T.softmax(scores_a, temperature=cfg.proto_temperature)
            p_b = T.softmax(scores_b, temperature=cfg.proto_temperature)
            proto = prototype_loss(p_a, codes_a, p_b, codes_b)
            components["proto_loss"] = float(proto.data)
            total = T.mul(proto, cfg.proto_loss_coef)
        if cfg.use_tcn_loss:
            scores_pos = T.gather(scores_all, np.arange(2 * b, 3 * b), axis=0)
            scores_neg = T.reshape(
                T.gather(scores_all, np.arange(3 * b, scores_all.shape[0]), axis=0),
                (b, cfg.n_negatives, cfg.n_prototypes))
            tcn = time_contrastive_loss(scores_a, scores_pos, scores_neg,
                                        cfg.tcn_temperature)
            components["tcn_loss"] = float(tcn.data)
            weighted = T.mul(tcn, cfg.tcn_loss_coef)
            total = weighted if total is None else T.add(total, weighted)
        if total is None:
            raise ValueError("at least one loss term must be enabled")

        loss_value = float(total.data)
        if not np.isfinite(loss_value):
            raise TrainingDiverged(
                f"non-finite loss at iteration {iteration}: total={loss_value} "
                f"components={components}")

        grads = T.backward(total)
        if iteration < cfg.prototype_freeze_iterations:
            grads.pop(bank.vectors, None)
        optimizer.step(grads)
        bank.renormalize()

        entry = {"iteration": iteration, "embodiment": embodiment,
                 "loss": loss_value, **components}
        log.append(entry)
        if iteration_callback is not None:
            iteration_callback(iteration, encoder, bank, entry)

    return DiscoveryResult(encoder=encoder, bank=bank, log=log)
