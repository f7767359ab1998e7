"""Pydantic schemas para validação."""

from .augment import AugmentConfig, MaskConfig
from .clustering import NeighborIndex
from .data import (
    NORMAL_STATE,
    DatasetManifest,
    FaultDescriptor,
    FaultKind,
    NormalizationStats,
    SensorRun,
    SyntheticSpec,
    WindowDataset,
    WindowSample,
)
from .model import ModelConfig
from .pipeline import (
    DataSection,
    AblationAxis,
    DataSource,
    EvalSection,
    PipelineConfig,
    UnbalanceConfig,
    default_fault_catalog,
    default_synthetic_spec,
)
from .report import (
    AggregatedReport,
    ClusteringMetrics,
    ContingencyTable,
    FaultRates,
    FddReport,
    LabelMap,
    MetricSummary,
)
from .training import (
    EpochStats,
    FinetuneConfig,
    FinetuneEpochStats,
    MiningMode,
    PretrainConfig,
    ScanConfig,
    ScanEpochStats,
    SslTasks,
)

__all__ = [
    "NORMAL_STATE",
    "AugmentConfig",
    "MaskConfig",
    "SensorRun",
    "WindowSample",
    "WindowDataset",
    "NormalizationStats",
    "FaultKind",
    "FaultDescriptor",
    "SyntheticSpec",
    "DatasetManifest",
    "ModelConfig",
    "AblationAxis",
    "DataSource",
    "DataSection",
    "EvalSection",
    "UnbalanceConfig",
    "PipelineConfig",
    "default_fault_catalog",
    "default_synthetic_spec",
    "NeighborIndex",
    "ContingencyTable",
    "LabelMap",
    "ClusteringMetrics",
    "FaultRates",
    "FddReport",
    "MetricSummary",
    "AggregatedReport",
    "SslTasks",
    "MiningMode",
    "PretrainConfig",
    "ScanConfig",
    "FinetuneConfig",
    "EpochStats",
    "ScanEpochStats",
    "FinetuneEpochStats",
]
