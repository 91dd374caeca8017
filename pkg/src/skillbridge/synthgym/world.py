"""Point-agent world with toggle targets and two observation renderings.

An agent moves in the unit square under velocity commands. Each skill has
a fixed target location; holding position inside a target's radius for a
few consecutive steps toggles it on, and toggles never reset on their
own. Both embodiments share this world exactly; they differ only in how
the agent is rendered into the observation's appearance block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..configs import WorldConfig
from ..rng import stream


def default_targets(n_skills: int) -> np.ndarray:
    """Fixed target layout: corners for four skills, a ring otherwise."""
    if n_skills == 4:
        return np.array([[0.15, 0.15], [0.15, 0.85], [0.85, 0.85], [0.85, 0.15]])
    angles = 2.0 * np.pi * np.arange(n_skills) / n_skills
    return 0.5 + 0.35 * np.stack([np.cos(angles), np.sin(angles)], axis=1)


@dataclass(frozen=True)
class EmbodimentRenderer:
    """Maps world state to an observation vector for one embodiment.

    The appearance block is sin(W @ pos + phase): a smooth embodiment-
    specific encoding of the agent position with no shared coordinates
    across embodiments. Toggle and position blocks are embodiment-free.
    """

    tag: str
    weights: np.ndarray  # (appearance_dim, 2)
    phases: np.ndarray   # (appearance_dim,)

    def appearance(self, pos: np.ndarray) -> np.ndarray:
        pos = np.asarray(pos, dtype=np.float64)
        return np.sin(pos @ self.weights.T + self.phases)

    def observe(self, toggles: np.ndarray, pos: np.ndarray) -> np.ndarray:
        return np.concatenate([
            np.asarray(toggles, dtype=np.float64),
            np.asarray(pos, dtype=np.float64),
            self.appearance(pos),
        ])

    def observe_sequence(self, toggles: np.ndarray, positions: np.ndarray) -> np.ndarray:
        appearances = np.sin(positions @ self.weights.T + self.phases)
        return np.concatenate([toggles.astype(np.float64), positions, appearances], axis=1)


def make_renderer(seed: int, tag: str, appearance_dim: int) -> EmbodimentRenderer:
    rng = stream(seed, f"appearance/{tag}")
    weights = rng.normal(0.0, 3.0, size=(appearance_dim, 2))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=appearance_dim)
    return EmbodimentRenderer(tag=tag, weights=weights, phases=phases)


class SimEnv:
    """Unit-square toggle world; velocity commands clipped by magnitude."""

    def __init__(self, cfg: WorldConfig, targets: np.ndarray | None = None):
        self.cfg = cfg
        self.targets = default_targets(cfg.n_skills) if targets is None else np.asarray(targets)
        self.pos = np.zeros(2)
        self.toggles = np.zeros(cfg.n_skills, dtype=bool)
        self._dwell = np.zeros(cfg.n_skills, dtype=int)

    def reset(self, pos: np.ndarray, toggles: np.ndarray | None = None) -> None:
        self.pos = np.clip(np.asarray(pos, dtype=np.float64), 0.0, 1.0)
        if toggles is None:
            self.toggles = np.zeros(self.cfg.n_skills, dtype=bool)
        else:
            self.toggles = np.asarray(toggles, dtype=bool).copy()
        self._dwell = np.zeros(self.cfg.n_skills, dtype=int)

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        action = np.asarray(action, dtype=np.float64)
        norm = float(np.linalg.norm(action))
        if norm > self.cfg.max_step:
            action = action * (self.cfg.max_step / norm)
        return action

    def step(self, action: np.ndarray) -> list[int]:
        """Apply one velocity command; returns subtasks toggled this step."""
        self.pos = np.clip(self.pos + self.clip_action(action), 0.0, 1.0)
        newly: list[int] = []
        for k in range(self.cfg.n_skills):
            if self.toggles[k]:
                continue
            if np.linalg.norm(self.pos - self.targets[k]) <= self.cfg.target_radius:
                self._dwell[k] += 1
            else:
                self._dwell[k] = 0
            if self._dwell[k] >= self.cfg.dwell_steps:
                self.toggles[k] = True
                newly.append(k)
        return newly

    def force_toggle(self, subtask: int, value: bool) -> None:
        """External perturbation hook; resets the dwell counter."""
        self.toggles[subtask] = bool(value)
        self._dwell[subtask] = 0


def sample_start(cfg: WorldConfig, targets: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Start position clear of every target so no toggle fires spuriously."""
    margin = cfg.target_radius + 0.06
    for _ in range(200):
        pos = rng.uniform(0.05, 0.95, size=2)
        if np.all(np.linalg.norm(targets - pos, axis=1) > margin):
            return pos
    raise RuntimeError("could not sample a start position clear of targets")


def scripted_rollout(cfg: WorldConfig, ordering: tuple[int, ...], rng: np.random.Generator,
                     tail_steps: int, targets: np.ndarray | None = None,
                     max_steps: int = 4000) -> dict[str, np.ndarray]:
    """Demonstrate `ordering` with a noisy proportional controller.

    Records (position, toggles, action) at every step, including a short
    tail after the last toggle so completed states appear in the data.
    Returns arrays keyed by 'positions', 'toggles', 'actions'.
    """
    env = SimEnv(cfg, targets)
    env.reset(sample_start(cfg, env.targets, rng))
    positions: list[np.ndarray] = []
    toggle_rows: list[np.ndarray] = []
    actions: list[np.ndarray] = []

    def record_and_step(action: np.ndarray) -> list[int]:
        executed = env.clip_action(action)
        positions.append(env.pos.copy())
        toggle_rows.append(env.toggles.astype(np.float64))
        actions.append(executed)
        return env.step(executed)

    for subtask in ordering:
        while not env.toggles[subtask]:
            if len(actions) >= max_steps:
                raise RuntimeError(f"rollout exceeded {max_steps} steps on subtask {subtask}")
            delta = env.targets[subtask] - env.pos
            if np.linalg.norm(delta) > 0.5 * cfg.target_radius:
                command = cfg.control_gain * delta
            else:
                command = np.zeros(2)
            command = command + rng.normal(0.0, cfg.action_noise, size=2)
            record_and_step(command)
    for _ in range(tail_steps):
        record_and_step(rng.normal(0.0, cfg.action_noise, size=2))

    return {
        "positions": np.array(positions),
        "toggles": np.array(toggle_rows),
        "actions": np.array(actions),
    }
