"""Definições da rede SensorSCAN."""

from .feature_extractor import (
    Classifier,
    Encoder,
    FeatureExtractor,
    PretrainNetwork,
    SequentialPooling,
    build_cluster_head,
    build_feature_extractor,
    build_pretrain_network,
    count_parameters,
)
from .heads import ClusterHead, ProjectionHead, ReconstructionHead

__all__ = [
    "Encoder",
    "SequentialPooling",
    "FeatureExtractor",
    "PretrainNetwork",
    "Classifier",
    "ProjectionHead",
    "ReconstructionHead",
    "ClusterHead",
    "build_feature_extractor",
    "build_pretrain_network",
    "build_cluster_head",
    "count_parameters",
]
