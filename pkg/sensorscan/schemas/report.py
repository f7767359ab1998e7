"""Schemas Pydantic de métricas, mapeamento de rótulos e relatórios."""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

REPORT_SCHEMA_VERSION = 1


class ContingencyTable(BaseModel):
    """Contagens estado × cluster."""

    states: list[int]
    clusters: list[int]
    counts: list[list[int]]

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.matrix.sum())


class LabelMap(BaseModel):
    """Mapeamento cluster → estado do processo obtido no conjunto de treino."""

    mapping: dict[int, Optional[int]] = Field(default_factory=dict)
    contingency: dict[int, dict[int, int]] = Field(default_factory=dict)

    @property
    def unmatched(self) -> list[int]:
        return sorted(c for c, state in self.mapping.items() if state is None)


class ClusteringMetrics(BaseModel):
    """ACC, NMI, ARI e RI entre estados verdadeiros e clusters."""

    acc: float
    nmi: float
    ari: float
    ri: float


class FaultRates(BaseModel):
    """Taxas de uma falha: diagnóstico (TPR_i), alarme falso (FPR_i) e detecção."""

    state: int
    tpr: Optional[float] = Field(default=None, description="Predições = i sobre amostras i")
    fpr: Optional[float] = Field(default=None, description="Normais preditas como i")
    detection_tpr: Optional[float] = Field(
        default=None, description="Qualquer falha predita sobre amostras i"
    )
    n_samples: int = 0


class FddReport(BaseModel):
    """Relatório de detecção e diagnóstico de falhas."""

    model_config = ConfigDict(extra="forbid")

    schema_version: int = REPORT_SCHEMA_VERSION
    variant: str = "sensorscan"
    per_fault: list[FaultRates] = Field(default_factory=list)
    detection_tpr: Optional[float] = None
    detection_fpr: Optional[float] = None
    cdr: Optional[float] = None
    add_samples: Optional[float] = None
    add_minutes: Optional[float] = None
    n_samples: int = 0
    n_faulty_runs: int = 0
    n_detected_runs: int = 0
    n_unmatched: int = Field(default=0, description="Amostras de teste em clusters sem estado")
    clustering: Optional[ClusteringMetrics] = None
    config_fingerprint: Optional[str] = None


class MetricSummary(BaseModel):
    """Média ± desvio de uma métrica sobre várias seeds."""

    mean: Optional[float]
    std: Optional[float]
    n: int


class AggregatedReport(BaseModel):
    """Relatório agregado (modo multi-seed)."""

    schema_version: int = REPORT_SCHEMA_VERSION
    variant: str
    seeds: list[int]
    metrics: dict[str, MetricSummary]
    per_fault_tpr: dict[int, MetricSummary] = Field(default_factory=dict)
    per_fault_fpr: dict[int, MetricSummary] = Field(default_factory=dict)
