"""Schema Pydantic da configuração completa do pipeline."""

import hashlib
import json
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .data import FaultDescriptor, FaultKind, SyntheticSpec
from .model import ModelConfig
from .training import FinetuneConfig, PretrainConfig, ScanConfig


class DataSource(str, Enum):
    """Origem das execuções."""

    SYNTHETIC = "synthetic"
    CSV = "csv"


class UnbalanceConfig(BaseModel):
    """Recorte do treino: poucas execuções por falha, muitas normais."""

    model_config = ConfigDict(extra="forbid")

    normal_count: int = Field(default=500, ge=1)
    per_fault_count: int = Field(default=5, ge=1)


class DataSection(BaseModel):
    """Dados: origem, janelas, canais, desbalanceamento e divisão."""

    model_config = ConfigDict(extra="forbid")

    source: DataSource = Field(default=DataSource.SYNTHETIC)
    csv_paths: list[str] = Field(default_factory=list, description="Run-CSV de entrada")
    test_csv_paths: list[str] = Field(
        default_factory=list, description="Run-CSV de teste (dispensa a divisão 80/20)"
    )
    synthetic: SyntheticSpec | None = Field(default=None)
    runs_per_state: int = Field(default=12, ge=1, description="Execuções sintéticas por estado")
    window_size: int = Field(default=100, ge=1, description="L")
    step: int = Field(default=1, ge=1, description="Passo da janela deslizante")
    channels: list[int] | None = Field(default=None, description="Allowlist de canais")
    unbalance: UnbalanceConfig | None = Field(default=None)
    train_fraction: float = Field(default=0.8, gt=0.0, lt=1.0)
    sampling_period_min: float = Field(default=3.0, gt=0)

    @model_validator(mode="after")
    def validate_source(self) -> "DataSection":
        if self.source == DataSource.CSV and not self.csv_paths:
            raise ValueError("source=csv exige csv_paths")
        if self.source == DataSource.SYNTHETIC and self.synthetic is None:
            self.synthetic = default_synthetic_spec(n_channels=30)
        return self


class UnmatchedPolicy(str, Enum):
    """Predição em cluster sem estado associado."""

    RAISE = "raise"
    NORMAL = "normal"


class EvalSection(BaseModel):
    """Avaliação: passo para o ADD, baseline e caminhos de saída."""

    model_config = ConfigDict(extra="forbid")

    step_size: int | None = Field(default=None, ge=1, description="Padrão: data.step")
    baseline_dims: int = Field(default=25, ge=1, description="Dimensão do PCA do baseline")
    baseline_restarts: int = Field(default=10, ge=1)
    report_dir: str | None = Field(default=None, description="Padrão: <artifacts>/evaluate")
    latency_samples: int = Field(default=32, ge=0, description="Amostras para medir latência")
    unmatched: UnmatchedPolicy = Field(
        default=UnmatchedPolicy.RAISE,
        description="raise: erro; normal: amostra vira estado normal e entra em n_unmatched",
    )


class PipelineConfig(BaseModel):
    """Configuração completa; valores padrão seguem o treino de referência."""

    model_config = ConfigDict(extra="forbid")

    data: DataSection = Field(default_factory=DataSection)
    model: ModelConfig = Field(default_factory=ModelConfig)
    pretrain: PretrainConfig = Field(default_factory=PretrainConfig)
    scan: ScanConfig = Field(default_factory=ScanConfig)
    finetune: FinetuneConfig = Field(default_factory=FinetuneConfig)
    eval: EvalSection = Field(default_factory=EvalSection)
    seed: int = Field(default=0)

    @model_validator(mode="after")
    def validate_consistency(self) -> "PipelineConfig":
        if self.model.window_size != self.data.window_size:
            raise ValueError("model.window_size deve ser igual a data.window_size")
        if self.data.channels is not None:
            if len(self.data.channels) != self.model.n_channels:
                raise ValueError("model.n_channels deve ser igual ao tamanho de data.channels")
        elif self.data.source == DataSource.SYNTHETIC and self.data.synthetic is not None:
            if self.data.synthetic.n_channels != self.model.n_channels:
                raise ValueError("model.n_channels deve ser igual a synthetic.n_channels")
        self.pretrain.augment.validate_for_window(self.data.window_size)
        return self

    @property
    def step_size(self) -> int:
        return self.eval.step_size or self.data.step

    def fingerprint(self) -> str:
        """SHA-256 do JSON canônico da configuração."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_seed(self, seed: int) -> "PipelineConfig":
        """Retorna cópia com a seed global propagada a todas as seções."""
        data = self.model_dump(mode="json")
        data["seed"] = seed
        for section in ("pretrain", "scan", "finetune"):
            data[section]["seed"] = seed
        if data["data"].get("synthetic") is not None:
            data["data"]["synthetic"]["seed"] = seed
        return PipelineConfig.model_validate(data)

    def updated(self, patch: dict) -> "PipelineConfig":
        """Retorna cópia com um patch aninhado aplicado (revalidado)."""
        data = self.model_dump(mode="json")
        _deep_update(data, patch)
        return PipelineConfig.model_validate(data)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "PipelineConfig":
        """Carrega e valida um arquivo JSON de configuração."""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def _deep_update(target: dict, patch: dict) -> None:
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _deep_update(target[key], value)
        else:
            target[key] = value


def default_fault_catalog(n_channels: int, hard_fault: bool = False) -> list[FaultDescriptor]:
    """
    Uma falha por família (degrau, variação aleatória, deriva lenta, travamento).

    Args:
        n_channels: Número de canais D (≥ 1).
        hard_fault: Acrescenta uma variação aleatória de baixa magnitude, difícil de
            separar do normal sem rótulos.

    Returns:
        list[FaultDescriptor]: Quatro (ou cinco) falhas em canais distintos quando D permite.
    """
    channel = [c % n_channels for c in range(8)]
    step_channels = [0, 1] if n_channels > 1 else [0]
    faults = [
        FaultDescriptor(kind=FaultKind.STEP, channels=step_channels, magnitude=1.5),
        FaultDescriptor(kind=FaultKind.RANDOM_VARIATION, channels=[channel[2]], magnitude=1.6),
        FaultDescriptor(kind=FaultKind.SLOW_DRIFT, channels=[channel[4]], magnitude=0.02),
        FaultDescriptor(kind=FaultKind.STICKING, channels=[channel[6]], magnitude=0.9),
    ]
    if hard_fault:
        faults.append(
            FaultDescriptor(
                kind=FaultKind.RANDOM_VARIATION, channels=[channel[7]], magnitude=1.3
            )
        )
    return faults


def default_synthetic_spec(
    n_channels: int = 8, seed: int = 0, hard_fault: bool = False
) -> SyntheticSpec:
    """Gerador padrão: estado normal + uma falha por família."""
    faults = default_fault_catalog(n_channels, hard_fault=hard_fault)
    return SyntheticSpec(
        n_channels=n_channels,
        n_states=len(faults) + 1,
        run_length=300,
        onset=100,
        faults=faults,
        seed=seed,
    )


class AblationAxis(str, Enum):
    """Eixos de ablação suportados pelo comando `ablate`."""

    SSL_TASKS = "ssl-tasks"
    MINING = "mining"
    N_CLUSTERS = "n-clusters"
    FAULT_SUBSET = "fault-subset"
