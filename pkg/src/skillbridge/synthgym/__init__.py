from .world import SimEnv, EmbodimentRenderer, default_targets, make_renderer, scripted_rollout
from .data import (
    Dataset,
    DatasetManifest,
    Trajectory,
    active_subtask_labels,
    anchor_starts,
    augment,
    generate_dataset,
    sample_clip,
    subsample_indices,
)
from .datafile import (
    ChecksumError,
    DataFileError,
    MagicError,
    TruncatedError,
    VersionError,
    dataset_to_debug_json,
    load_dataset,
    save_dataset,
)

__all__ = [
    "SimEnv", "EmbodimentRenderer", "default_targets", "make_renderer", "scripted_rollout",
    "Dataset", "DatasetManifest", "Trajectory", "active_subtask_labels", "anchor_starts",
    "augment", "generate_dataset", "sample_clip", "subsample_indices",
    "ChecksumError", "DataFileError", "MagicError", "TruncatedError", "VersionError",
    "dataset_to_debug_json", "load_dataset", "save_dataset",
]
