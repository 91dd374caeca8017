from .encoder import TemporalSkillEncoder
from .prototypes import PrototypeBank, project_scores, prototype_probs
from .losses import prototype_loss, sample_tcn_triplet, time_contrastive_loss
from .train import DiscoveryResult, TrainingDiverged, train_discovery, init_discovery_models

__all__ = [
    "TemporalSkillEncoder", "PrototypeBank", "project_scores", "prototype_probs",
    "prototype_loss", "sample_tcn_triplet", "time_contrastive_loss",
    "DiscoveryResult", "TrainingDiverged", "train_discovery", "init_discovery_models",
]
