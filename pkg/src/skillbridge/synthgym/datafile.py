"""Length-prefixed binary container for datasets, with a trailing CRC32.

Layout: 8-byte magic, u32 format version, canonical-JSON manifest block,
u32 section counts, trajectory records (tag byte, u32 lengths, f64
little-endian arrays), and a final u32 CRC32 over everything before it.
The checksum is verified before any parsing so corruption surfaces as an
explicit error instead of garbage trajectories.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .. import binio
from .data import Dataset, DatasetManifest, Trajectory

MAGIC = b"XSKLDATA"
FILE_VERSION = 1

_TAGS = {"h": 0x48, "r": 0x52}
_TAGS_REVERSE = {v: k for k, v in _TAGS.items()}


DataFileError = binio.FormatError
MagicError = binio.MagicError
VersionError = binio.VersionError
TruncatedError = binio.TruncatedError
ChecksumError = binio.ChecksumError


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _pack_array(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _pack_trajectory(traj: Trajectory) -> bytes:
    parts = [struct.pack("<B", _TAGS[traj.embodiment])]
    obs = np.asarray(traj.observations, dtype=np.float64)
    parts.append(struct.pack("<II", obs.shape[0], obs.shape[1]))
    parts.append(struct.pack("<d", traj.speed_ratio))
    order = np.asarray(traj.subtask_order, dtype=np.float64)
    parts.append(struct.pack("<I", len(order)))
    parts.append(_pack_array(order))
    parts.append(_pack_array(obs))
    if traj.embodiment == "r":
        parts.append(_pack_array(traj.proprio))
        parts.append(_pack_array(traj.actions))
    return b"".join(parts)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    body = [MAGIC, struct.pack("<I", FILE_VERSION)]
    manifest_bytes = _canonical_json(dataclasses.asdict(dataset.manifest))
    body.append(struct.pack("<I", len(manifest_bytes)))
    body.append(manifest_bytes)
    sections = [dataset.train_h, dataset.train_r, dataset.prompt_h, dataset.prompt_r]
    body.append(struct.pack("<IIII", *(len(s) for s in sections)))
    for section in sections:
        for traj in section:
            body.append(_pack_trajectory(traj))
    Path(path).write_bytes(binio.finalize(b"".join(body)))


def _read_trajectory(reader: binio.Reader) -> Trajectory:
    tag = reader.u8()
    if tag not in _TAGS_REVERSE:
        raise DataFileError(f"unknown trajectory tag byte 0x{tag:02x}")
    embodiment = _TAGS_REVERSE[tag]
    n_steps = reader.u32()
    obs_dim = reader.u32()
    speed_ratio = reader.f64()
    order_len = reader.u32()
    order = tuple(int(v) for v in reader.array(order_len))
    obs = reader.array(n_steps * obs_dim).reshape(n_steps, obs_dim)
    proprio = actions = None
    if embodiment == "r":
        proprio = reader.array(n_steps * 2).reshape(n_steps, 2)
        actions = reader.array(n_steps * 2).reshape(n_steps, 2)
    return Trajectory(embodiment, obs, order, speed_ratio, proprio=proprio, actions=actions)


def load_dataset(path: str | Path) -> Dataset:
    payload = binio.verify(Path(path).read_bytes(), MAGIC)
    reader = binio.Reader(payload)
    reader.take(len(MAGIC))
    version = reader.u32()
    if version != FILE_VERSION:
        raise VersionError(f"file version {version} not supported (expected {FILE_VERSION})")
    manifest_len = reader.u32()
    manifest_dict = json.loads(reader.take(manifest_len).decode("utf-8"))
    manifest = DatasetManifest(**manifest_dict)
    counts = [reader.u32() for _ in range(4)]
    sections = [[_read_trajectory(reader) for _ in range(count)] for count in counts]
    reader.expect_end()
    manifest.validate()
    return Dataset(manifest=manifest, train_h=sections[0], train_r=sections[1],
                   prompt_h=sections[2], prompt_r=sections[3])


def dataset_to_debug_json(dataset: Dataset) -> dict:
    """Verbose JSON mirror of the binary format, for inspection only."""

    def traj_dict(traj: Trajectory) -> dict:
        out = {
            "embodiment": traj.embodiment,
            "subtask_order": list(traj.subtask_order),
            "speed_ratio": traj.speed_ratio,
            "observations": traj.observations.tolist(),
        }
        if traj.embodiment == "r":
            out["proprio"] = traj.proprio.tolist()
            out["actions"] = traj.actions.tolist()
        return out

    return {
        "manifest": dataclasses.asdict(dataset.manifest),
        "train_h": [traj_dict(t) for t in dataset.train_h],
        "train_r": [traj_dict(t) for t in dataset.train_r],
        "prompt_h": [traj_dict(t) for t in dataset.prompt_h],
        "prompt_r": [traj_dict(t) for t in dataset.prompt_r],
    }
