"""Cross-embodiment demonstration datasets with paired renderings.

Every demonstration is a single scripted world rollout rendered twice:
once per embodiment. The h embodiment carries observations only and may
be temporally sub-sampled to emulate faster execution; the r embodiment
additionally records proprioception and the executed velocity commands.
Held-out subtask orderings are reserved for prompt trajectories and never
appear in training data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..configs import AugmentConfig, DataConfig, WorldConfig
from ..rng import stream
from .world import EmbodimentRenderer, default_targets, make_renderer, scripted_rollout

DATASET_GENERATOR_VERSION = 1


@dataclass
class Trajectory:
    embodiment: str  # "h" or "r"
    observations: np.ndarray  # (n_steps, obs_dim)
    subtask_order: tuple[int, ...]
    speed_ratio: float
    proprio: np.ndarray | None = None  # (n_steps, 2), r only
    actions: np.ndarray | None = None  # (n_steps, 2), r only

    def __post_init__(self):
        if self.embodiment not in ("h", "r"):
            raise ValueError(f"embodiment must be 'h' or 'r', got {self.embodiment!r}")
        if self.embodiment == "r":
            if self.proprio is None or self.actions is None:
                raise ValueError("r trajectories require proprio and actions")
            if not (len(self.observations) == len(self.proprio) == len(self.actions)):
                raise ValueError("r trajectory streams must have equal length")

    @property
    def n_steps(self) -> int:
        return len(self.observations)


@dataclass
class DatasetManifest:
    version: int
    seed: int
    n_skills: int
    appearance_dim: int
    subtasks_per_task: int
    h_speed_ratio: float
    train_orderings: list[list[int]]
    prompt_orderings: list[list[int]]
    ordering_counts: dict[str, int]
    counts: dict[str, int]
    dropped_transitions: list[list[int]]
    world: dict
    renderers: dict[str, dict[str, list]]

    def validate(self) -> None:
        train = {tuple(o) for o in self.train_orderings}
        held_out = {tuple(o) for o in self.prompt_orderings}
        overlap = train & held_out
        if overlap:
            raise ValueError(f"prompt orderings leak into training data: {sorted(overlap)}")


@dataclass
class Dataset:
    manifest: DatasetManifest
    train_h: list[Trajectory] = field(default_factory=list)
    train_r: list[Trajectory] = field(default_factory=list)
    prompt_h: list[Trajectory] = field(default_factory=list)
    prompt_r: list[Trajectory] = field(default_factory=list)

    def renderer(self, tag: str) -> EmbodimentRenderer:
        spec = self.manifest.renderers[tag]
        return EmbodimentRenderer(tag=tag, weights=np.array(spec["weights"]),
                                  phases=np.array(spec["phases"]))

    def world_config(self) -> WorldConfig:
        return WorldConfig(**self.manifest.world)

    def targets(self) -> np.ndarray:
        return default_targets(self.manifest.n_skills)


def subsample_indices(n_steps: int, ratio: float) -> np.ndarray:
    """Frame indices kept when playing a rollout back `ratio` times faster."""
    if ratio <= 0:
        raise ValueError(f"speed ratio must be positive, got {ratio}")
    if ratio == 1.0:
        return np.arange(n_steps)
    idx = np.unique(np.round(np.arange(0.0, n_steps, ratio)).astype(int))
    return idx[idx < n_steps]


def _transitions(ordering: tuple[int, ...]) -> set[tuple[int, int]]:
    return set(zip(ordering[:-1], ordering[1:]))


def _select_train_orderings(candidates: list[tuple[int, ...]], n_train: int) -> list[tuple[int, ...]]:
    """Greedy pick maximizing transition coverage; deterministic tie-break."""
    chosen: list[tuple[int, ...]] = []
    covered: set[tuple[int, int]] = set()
    pool = list(candidates)
    while len(chosen) < n_train and pool:
        best = max(pool, key=lambda o: (len(_transitions(o) - covered), [-v for v in o]))
        chosen.append(best)
        covered |= _transitions(best)
        pool.remove(best)
    if len(chosen) < n_train:
        raise ValueError(f"only {len(chosen)} training orderings available, need {n_train}")
    return chosen


def generate_dataset(cfg: DataConfig, seed: int) -> Dataset:
    """Deterministically build paired train and prompt trajectories."""
    cfg.validate()
    world = cfg.world
    if world.n_skills != cfg.n_skills:
        world = WorldConfig(**{**world.__dict__, "n_skills": cfg.n_skills})
    targets = default_targets(cfg.n_skills)

    all_orderings = list(itertools.permutations(range(cfg.n_skills), cfg.subtasks_per_task))
    order_rng = stream(seed, "orderings")
    shuffled = [all_orderings[i] for i in order_rng.permutation(len(all_orderings))]
    prompt_orderings = shuffled[:cfg.n_prompt_orderings]
    candidates = shuffled[cfg.n_prompt_orderings:]

    dropped: list[tuple[int, int]] = []
    if cfg.drop_transitions > 0:
        pairs = list(itertools.permutations(range(cfg.n_skills), 2))
        n_drop = int(round(cfg.drop_transitions * len(pairs)))
        drop_rng = stream(seed, "dropped-transitions")
        dropped = [pairs[i] for i in drop_rng.permutation(len(pairs))[:n_drop]]
        drop_set = set(dropped)
        candidates = [o for o in candidates if not (_transitions(o) & drop_set)]

    train_orderings = _select_train_orderings(candidates, cfg.n_train_orderings)

    renderers = {tag: make_renderer(seed, tag, cfg.appearance_dim) for tag in ("h", "r")}

    def render_pair(roll: dict[str, np.ndarray], ordering: tuple[int, ...]) -> tuple[Trajectory, Trajectory]:
        obs_h = renderers["h"].observe_sequence(roll["toggles"], roll["positions"])
        obs_r = renderers["r"].observe_sequence(roll["toggles"], roll["positions"])
        keep = subsample_indices(len(obs_h), cfg.h_speed_ratio)
        human = Trajectory("h", obs_h[keep], ordering, cfg.h_speed_ratio)
        robot = Trajectory("r", obs_r, ordering, 1.0,
                           proprio=roll["positions"].copy(), actions=roll["actions"].copy())
        return human, robot

    train_h: list[Trajectory] = []
    train_r: list[Trajectory] = []
    prompt_h: list[Trajectory] = []
    prompt_r: list[Trajectory] = []
    for oi, ordering in enumerate(train_orderings):
        for rep in range(cfg.trajectories_per_ordering):
            roll_rng = stream(seed, f"rollout/train/{oi}/{rep}")
            roll = scripted_rollout(world, ordering, roll_rng, cfg.tail_steps, targets)
            human, robot = render_pair(roll, ordering)
            train_h.append(human)
            train_r.append(robot)
    for pi, ordering in enumerate(prompt_orderings):
        roll_rng = stream(seed, f"rollout/prompt/{pi}/0")
        roll = scripted_rollout(world, ordering, roll_rng, cfg.tail_steps, targets)
        human, robot = render_pair(roll, ordering)
        prompt_h.append(human)
        prompt_r.append(robot)

    manifest = DatasetManifest(
        version=DATASET_GENERATOR_VERSION,
        seed=seed,
        n_skills=cfg.n_skills,
        appearance_dim=cfg.appearance_dim,
        subtasks_per_task=cfg.subtasks_per_task,
        h_speed_ratio=cfg.h_speed_ratio,
        train_orderings=[list(o) for o in train_orderings],
        prompt_orderings=[list(o) for o in prompt_orderings],
        ordering_counts={"-".join(map(str, o)): cfg.trajectories_per_ordering
                         for o in train_orderings},
        counts={
            "train_h": len(train_h), "train_r": len(train_r),
            "prompt_h": len(prompt_h), "prompt_r": len(prompt_r),
        },
        dropped_transitions=[list(p) for p in dropped],
        world=dict(world.__dict__),
        renderers={tag: {"weights": r.weights.tolist(), "phases": r.phases.tolist()}
                   for tag, r in renderers.items()},
    )
    manifest.validate()
    return Dataset(manifest=manifest, train_h=train_h, train_r=train_r,
                   prompt_h=prompt_h, prompt_r=prompt_r)


def anchor_starts(n_steps: int, n_anchors: int, clip_len: int) -> np.ndarray:
    """Start frames of the n_anchors+1 uniformly spaced clip windows."""
    if n_steps < clip_len:
        raise ValueError(f"trajectory length {n_steps} shorter than clip length {clip_len}")
    anchors = np.round(np.arange(n_anchors + 1) * (n_steps - 1) / n_anchors).astype(int)
    return np.minimum(anchors, n_steps - clip_len)


def sample_clip(trajectory: Trajectory, n_anchors: int, clip_len: int, j: int) -> np.ndarray:
    """The clip at anchor j: `clip_len` consecutive frames, end-clamped."""
    if not 0 <= j <= n_anchors:
        raise ValueError(f"anchor index {j} outside [0, {n_anchors}]")
    start = anchor_starts(trajectory.n_steps, n_anchors, clip_len)[j]
    return trajectory.observations[start:start + clip_len].copy()


def clip_at_frame(observations: np.ndarray, t: int, clip_len: int) -> np.ndarray:
    """Forward-looking window starting at frame t, clamped to fit."""
    n = len(observations)
    if n < clip_len:
        raise ValueError(f"trajectory length {n} shorter than clip length {clip_len}")
    start = min(t, n - clip_len)
    return observations[start:start + clip_len]


def augment(clip: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator,
            n_skills: int) -> np.ndarray:
    """One randomly chosen perturbation applied uniformly across the clip.

    The toggle block is never touched; every transform degenerates to the
    identity when its strength is zero.
    """
    clip = np.array(clip, dtype=np.float64, copy=True)
    appearance = slice(n_skills + 2, clip.shape[1])
    width = clip.shape[1] - (n_skills + 2)
    choice = int(rng.integers(0, 4))
    if choice == 0:
        clip[:, appearance] += rng.normal(0.0, 1.0, size=width) * cfg.noise_sigma
    elif choice == 1:
        factors = 1.0 + cfg.scale_jitter * rng.uniform(-1.0, 1.0, size=width)
        clip[:, appearance] *= factors
    elif choice == 2:
        if cfg.dropout_max_span > 0 and width > 0:
            span = int(rng.integers(1, min(cfg.dropout_max_span, width) + 1))
            start = int(rng.integers(0, width - span + 1))
            clip[:, appearance][:, start:start + span] = 0.0
    else:
        if cfg.temporal_crop > 0 and len(clip) > 1:
            if rng.integers(0, 2) == 0:
                clip = np.concatenate([clip[1:], clip[-1:]], axis=0)
            else:
                clip = np.concatenate([clip[:1], clip[:-1]], axis=0)
    return clip


def active_subtask_labels(trajectory: Trajectory) -> np.ndarray:
    """Per-frame id of the subtask currently being worked toward.

    Derived from the toggle block: the active subtask is the first entry
    of the demonstrated ordering not yet toggled; after completion the
    last subtask keeps the label.
    """
    order = list(trajectory.subtask_order)
    toggles = trajectory.observations[:, order] > 0.5
    done_count = toggles.sum(axis=1).astype(int)
    done_count = np.minimum(done_count, len(order) - 1)
    return np.array([order[c] for c in done_count])
