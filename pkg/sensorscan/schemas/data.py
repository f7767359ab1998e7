"""Schemas Pydantic para dados de sensores."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

NORMAL_STATE = 0


class SensorRun(BaseModel):
    """Uma execução (simulação ou operação de planta): matriz T×D de sensores."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    run_id: str = Field(..., min_length=1, description="Identificador da execução")
    fault_label: int = Field(..., ge=0, description="Estado do processo (0 = normal)")
    fault_onset: Optional[int] = Field(
        default=None, ge=0, description="Índice do primeiro timestamp com falha"
    )
    values: np.ndarray = Field(..., description="Matriz T×D de leituras")
    sampling_period_min: float = Field(default=3.0, gt=0, description="Período de amostragem (min)")

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: object) -> np.ndarray:
        """Garante matriz 2-D finita com ao menos um timestamp."""
        array = np.asarray(v, dtype=np.float64)
        if array.ndim != 2:
            raise ValueError(f"values deve ser uma matriz T×D, recebido ndim={array.ndim}")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError("values deve ter T ≥ 1 e D ≥ 1")
        if not np.all(np.isfinite(array)):
            raise ValueError("values contém NaN ou Inf")
        return array

    @model_validator(mode="after")
    def validate_onset(self) -> "SensorRun":
        """Execuções com falha exigem onset dentro da execução."""
        if self.fault_label != NORMAL_STATE:
            if self.fault_onset is None:
                raise ValueError(f"execução com falha {self.run_id} sem fault_onset")
            if not 0 <= self.fault_onset < self.length:
                raise ValueError(
                    f"fault_onset {self.fault_onset} fora de [0, {self.length}) em {self.run_id}"
                )
        return self

    @property
    def length(self) -> int:
        """Número de timestamps T."""
        return int(self.values.shape[0])

    @property
    def n_channels(self) -> int:
        """Número de sensores D."""
        return int(self.values.shape[1])

    @property
    def is_faulty(self) -> bool:
        return self.fault_label != NORMAL_STATE

    def with_values(self, values: np.ndarray) -> "SensorRun":
        """Retorna cópia da execução com outra matriz de valores."""
        return SensorRun(
            run_id=self.run_id,
            fault_label=self.fault_label,
            fault_onset=self.fault_onset,
            values=values,
            sampling_period_min=self.sampling_period_min,
        )

    def __repr__(self) -> str:
        """Representação string da execução."""
        return (
            f"<SensorRun(run_id={self.run_id}, label={self.fault_label}, "
            f"T={self.length}, D={self.n_channels})>"
        )


class WindowSample(BaseModel):
    """Janela L×D de uma execução com o estado derivado do último timestamp."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    run_id: str
    end_index: int = Field(..., ge=0)
    values: np.ndarray
    label: int = Field(..., ge=0)


@dataclass
class WindowDataset:
    """Conjunto de janelas em formato denso para treino em lote."""

    values: np.ndarray  # [N, L, D]
    labels: np.ndarray  # [N]
    run_ids: np.ndarray  # [N] (str)
    end_indices: np.ndarray  # [N]

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, index: int) -> WindowSample:
        return WindowSample(
            run_id=str(self.run_ids[index]),
            end_index=int(self.end_indices[index]),
            values=self.values[index],
            label=int(self.labels[index]),
        )

    @property
    def window_size(self) -> int:
        return int(self.values.shape[1])

    @property
    def n_channels(self) -> int:
        return int(self.values.shape[2])

    def subset(self, indices: np.ndarray) -> "WindowDataset":
        """Retorna as janelas nas posições indicadas (na ordem dada)."""
        indices = np.asarray(indices, dtype=np.int64)
        return WindowDataset(
            values=self.values[indices],
            labels=self.labels[indices],
            run_ids=self.run_ids[indices],
            end_indices=self.end_indices[indices],
        )

    def filter_states(self, states: list[int]) -> "WindowDataset":
        """Mantém apenas janelas de execuções cujos estados estão na lista."""
        keep = np.isin(self.labels, states)
        return self.subset(np.flatnonzero(keep))


class NormalizationStats(BaseModel):
    """Média e desvio padrão (populacional) por canal."""

    mean: list[float]
    std: list[float]

    @model_validator(mode="after")
    def validate_stats(self) -> "NormalizationStats":
        if len(self.mean) != len(self.std):
            raise ValueError("mean e std devem ter o mesmo tamanho")
        if any(s <= 0 for s in self.std):
            raise ValueError("std deve ser positivo em todos os canais")
        return self

    @property
    def mean_array(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=np.float64)

    @property
    def std_array(self) -> np.ndarray:
        return np.asarray(self.std, dtype=np.float64)


class FaultKind(str, Enum):
    """Famílias de falha do gerador sintético."""

    STEP = "step"
    RANDOM_VARIATION = "random_variation"
    SLOW_DRIFT = "slow_drift"
    STICKING = "sticking"


class FaultDescriptor(BaseModel):
    """Descrição de um estado de falha do gerador sintético."""

    model_config = ConfigDict(extra="forbid")

    kind: FaultKind
    channels: list[int] = Field(..., min_length=1, description="Canais afetados")
    magnitude: float = Field(..., description="Magnitude (semântica depende do tipo)")

    @model_validator(mode="after")
    def validate_magnitude(self) -> "FaultDescriptor":
        if self.kind == FaultKind.STICKING and not 0.0 <= self.magnitude <= 1.0:
            raise ValueError("magnitude de sticking é uma probabilidade em [0, 1]")
        if self.kind == FaultKind.RANDOM_VARIATION and self.magnitude < 0:
            raise ValueError("magnitude de random_variation deve ser ≥ 0")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("canais afetados repetidos")
        return self


class SyntheticSpec(BaseModel):
    """Especificação do gerador sintético de processo."""

    model_config = ConfigDict(extra="forbid")

    n_channels: int = Field(default=8, ge=1, description="D")
    n_states: int = Field(default=5, ge=2, description="Q (inclui o estado normal)")
    run_length: int = Field(default=300, ge=1, description="T")
    onset: int = Field(default=100, ge=0, description="Índice de início da falha")
    faults: list[FaultDescriptor] = Field(default_factory=list, description="Q-1 falhas")
    noise_std: float = Field(default=0.1, gt=0, description="Desvio das inovações AR(1)")
    ar_coef: float = Field(default=0.8, ge=0.0, lt=1.0, description="Coeficiente AR(1)")
    baseline_std: float = Field(default=1.0, ge=0.0, description="Dispersão das linhas de base")
    sampling_period_min: float = Field(default=3.0, gt=0)
    seed: int = Field(default=0)

    @model_validator(mode="after")
    def validate_spec(self) -> "SyntheticSpec":
        if self.onset >= self.run_length:
            raise ValueError("onset deve ser menor que run_length")
        if len(self.faults) != self.n_states - 1:
            raise ValueError(
                f"esperadas {self.n_states - 1} falhas, recebidas {len(self.faults)}"
            )
        for index, fault in enumerate(self.faults, start=1):
            if any(c < 0 or c >= self.n_channels for c in fault.channels):
                raise ValueError(f"falha {index}: canal fora de [0, {self.n_channels})")
            if len(fault.channels) > self.n_channels:
                raise ValueError(f"falha {index}: mais canais afetados que D")
        return self


class DatasetManifest(BaseModel):
    """Resumo de um conjunto de execuções gravado junto ao CSV."""

    n_runs: int
    runs_per_state: dict[int, int]
    n_channels: int
    min_length: int
    max_length: int
    source: str
    seed: Optional[int] = None
    config_fingerprint: Optional[str] = None
