"""Checksummed checkpoint container for named parameter tensors.

A checkpoint holds a JSON config block plus any number of sections, each
mapping parameter names to float64 arrays. Sections keep independently
trained components (skill encoder + prototypes, the action policy, the
alignment transformer) in clearly separated namespaces within one format.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import binio

MAGIC = b"XSKLCKPT"
FILE_VERSION = 1

CheckpointError = binio.FormatError


def save_checkpoint(path: str | Path, config: dict,
                    sections: dict[str, dict[str, np.ndarray]]) -> None:
    parts = [MAGIC, struct.pack("<I", FILE_VERSION)]
    config_bytes = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts.append(struct.pack("<I", len(config_bytes)))
    parts.append(config_bytes)
    entries = [(f"{section}/{name}", np.asarray(arr, dtype=np.float64))
               for section, params in sections.items()
               for name, arr in params.items()]
    parts.append(struct.pack("<I", len(entries)))
    for name, arr in entries:
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(binio.finalize(b"".join(parts)))


def load_checkpoint(path: str | Path) -> tuple[dict, dict[str, dict[str, np.ndarray]]]:
    payload = binio.verify(Path(path).read_bytes(), MAGIC)
    reader = binio.Reader(payload)
    reader.take(len(MAGIC))
    version = reader.u32()
    if version != FILE_VERSION:
        raise binio.VersionError(f"checkpoint version {version} not supported (expected {FILE_VERSION})")
    config = json.loads(reader.take(reader.u32()).decode("utf-8"))
    sections: dict[str, dict[str, np.ndarray]] = {}
    for _ in range(reader.u32()):
        name = reader.take(reader.u32()).decode("utf-8")
        ndim = reader.u32()
        shape = tuple(reader.u32() for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        arr = reader.array(count).reshape(shape)
        section, _, param = name.partition("/")
        sections.setdefault(section, {})[param] = arr
    reader.expect_end()
    return config, sections
