"""Dataclass configuration tree with a flat key=value file format.

A config file is plain text, one `dotted.key = value` per line, with a
`config_version` header. Unspecified keys keep their defaults, so a file
only needs to list what it overrides. The exact effective config is
written next to every output an experiment produces.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, get_args, get_origin

CONFIG_VERSION = 1


@dataclass
class WorldConfig:
    n_skills: int = 4
    target_radius: float = 0.06
    dwell_steps: int = 4
    max_step: float = 0.05
    control_gain: float = 0.8
    action_noise: float = 0.004


@dataclass
class AugmentConfig:
    noise_sigma: float = 0.1
    scale_jitter: float = 0.2
    dropout_max_span: int = 6
    temporal_crop: int = 1


@dataclass
class DataConfig:
    n_skills: int = 4
    appearance_dim: int = 16
    subtasks_per_task: int = 3
    n_train_orderings: int = 8
    trajectories_per_ordering: int = 6
    n_prompt_orderings: int = 4
    h_speed_ratio: float = 1.0
    drop_transitions: float = 0.0
    tail_steps: int = 6
    world: WorldConfig = field(default_factory=WorldConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    @property
    def obs_dim(self) -> int:
        return self.n_skills + 2 + self.appearance_dim

    def validate(self) -> None:
        if self.n_skills < 1:
            raise ValueError("n_skills must be >= 1")
        if self.h_speed_ratio <= 0:
            raise ValueError("h_speed_ratio must be positive")
        if self.subtasks_per_task < 1 or self.subtasks_per_task > self.n_skills:
            raise ValueError("subtasks_per_task must be in [1, n_skills]")
        if self.trajectories_per_ordering < 1:
            raise ValueError("trajectories_per_ordering must be >= 1")


@dataclass
class EncoderConfig:
    skill_dim: int = 32
    frame_hidden: int = 64
    layers: int = 2
    heads: int = 2
    ff_dim: int = 64


@dataclass
class DiscoveryConfig:
    n_prototypes: int = 32
    clip_len: int = 8
    n_anchors: int = 100
    sinkhorn_epsilon: float = 0.03
    sinkhorn_iterations: int = 3
    proto_loss_coef: float = 0.5
    tcn_loss_coef: float = 1.0
    proto_temperature: float = 0.1
    tcn_temperature: float = 0.1
    positive_window: int = 4
    negative_window: int = 12
    n_negatives: int = 16
    batch_size: int = 16
    learning_rate: float = 1e-3
    iterations: int = 300
    prototype_freeze_iterations: int = 3
    use_prototype_loss: bool = True
    use_tcn_loss: bool = True
    encoder: EncoderConfig = field(default_factory=EncoderConfig)

    def validate(self) -> None:
        positives = [
            self.n_prototypes, self.clip_len, self.n_anchors, self.sinkhorn_epsilon,
            self.sinkhorn_iterations, self.proto_temperature, self.tcn_temperature,
            self.positive_window, self.negative_window, self.n_negatives,
            self.batch_size, self.learning_rate, self.iterations,
        ]
        if any(v <= 0 for v in positives):
            raise ValueError("discovery hyperparameters must be positive")
        if self.positive_window >= self.negative_window:
            raise ValueError("positive_window must be smaller than negative_window")


@dataclass
class TransferConfig:
    diffusion_steps: int = 50
    beta_start: float = 1e-4
    beta_end: float = 0.2
    action_horizon: int = 8
    exec_horizon: int = 4
    hidden_dims: tuple[int, ...] = (128, 128, 128)
    step_embed_dim: int = 16
    n_obs_steps: int = 1
    batch_size: int = 64
    learning_rate: float = 1e-3
    iterations: int = 1200


@dataclass
class ComposeConfig:
    plan_length: int = 50
    layers: int = 4
    heads: int = 2
    state_hidden: int = 64
    batch_size: int = 12
    learning_rate: float = 1e-3
    iterations: int = 500
    step_limit: int = 250


@dataclass
class BenchConfig:
    seeds: tuple[int, ...] = (0, 1, 2)
    speeds: tuple[float, ...] = (1.0, 1.3, 1.5)
    methods: tuple[str, ...] = ("full", "no_proto", "no_tcn", "nn_compose")
    episodes_per_cell: int = 32
    workers: int = 0
    data: DataConfig = field(default_factory=DataConfig)
    discover: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    transfer: TransferConfig = field(default_factory=TransferConfig)
    compose: ComposeConfig = field(default_factory=ComposeConfig)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def to_flat(config: Any, prefix: str = "") -> dict[str, str]:
    """Flatten a config dataclass into dotted-key -> string-value pairs."""
    out: dict[str, str] = {}
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        key = f"{prefix}{f.name}"
        if dataclasses.is_dataclass(value):
            out.update(to_flat(value, prefix=f"{key}."))
        else:
            out[key] = _format_value(value)
    return out


def _parse_scalar(text: str, target_type: Any) -> Any:
    text = text.strip()
    if target_type is bool:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"cannot parse boolean from {text!r}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    if target_type is str:
        return text
    origin = get_origin(target_type)
    if origin is tuple:
        args = get_args(target_type)
        item_type = args[0]
        items = [t for t in text.split(",") if t.strip() != ""]
        return tuple(_parse_scalar(item, item_type) for item in items)
    raise TypeError(f"unsupported config field type {target_type}")


def apply_flat(config: Any, flat: dict[str, str]) -> None:
    """Set dotted keys on a config tree in place; unknown keys raise."""
    import typing

    hints = typing.get_type_hints(type(config))
    field_names = {f.name for f in dataclasses.fields(config)}
    for key, value in flat.items():
        head, _, rest = key.partition(".")
        if head not in field_names:
            raise KeyError(f"unknown config key {key!r}")
        current = getattr(config, head)
        if rest:
            if not dataclasses.is_dataclass(current):
                raise KeyError(f"{head!r} has no nested keys")
            apply_flat(current, {rest: value})
        else:
            if dataclasses.is_dataclass(current):
                raise KeyError(f"{key!r} names a config section, not a value")
            setattr(config, head, _parse_scalar(value, hints[head]))


def save_config(config: Any, path: str | Path) -> None:
    lines = [f"config_version = {CONFIG_VERSION}"]
    lines += [f"{k} = {v}" for k, v in sorted(to_flat(config).items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a key=value file, checking the version header."""
    flat: dict[str, str] = {}
    version_seen = None
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "config_version":
            version_seen = int(value)
            continue
        flat[key] = value
    if version_seen is not None and version_seen != CONFIG_VERSION:
        raise ValueError(f"config version {version_seen} not supported (expected {CONFIG_VERSION})")
    return flat


def load_bench_config(path: str | Path | None) -> BenchConfig:
    config = BenchConfig()
    if path is not None:
        apply_flat(config, load_config_file(path))
    return config
