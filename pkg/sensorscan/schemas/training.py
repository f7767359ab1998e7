"""Schemas Pydantic das etapas de treino."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .augment import AugmentConfig, MaskConfig


class SslTasks(str, Enum):
    """Tarefas auto-supervisionadas ativas no pré-treino."""

    BOTH = "both"
    RECONSTRUCTION = "reconstruction"
    CONTRASTIVE = "contrastive"


class MiningMode(str, Enum):
    """Estratégia de mineração de vizinhos."""

    CHUNKED = "chunked"
    NAIVE = "naive"


class PretrainConfig(BaseModel):
    """Pré-treino auto-supervisionado (reconstrução mascarada + NT-Xent)."""

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=8, ge=0, description="E")
    batch_size: int = Field(default=1024, ge=2, description="B")
    lr: float = Field(default=1e-3, gt=0)
    weight_decay: float = Field(default=1e-4, ge=0)
    lambda_cont: float = Field(default=0.7, ge=0, description="Peso da perda contrastiva")
    temperature: float = Field(default=0.2, gt=0, description="τ")
    tasks: SslTasks = Field(default=SslTasks.BOTH)
    mask: MaskConfig = Field(default_factory=MaskConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    pretrain_states: list[int] | None = Field(
        default=None, description="Estados vistos no pré-treino (None = todos)"
    )
    untrained: bool = Field(default=False, description="Pular o pré-treino (pesos aleatórios)")
    seed: int = Field(default=0)


class ScanConfig(BaseModel):
    """Mineração de vizinhos e treino de clustering com a perda SCAN."""

    model_config = ConfigDict(extra="forbid")

    n_neighbors: int = Field(default=12, ge=1, description="K")
    n_chunks: int = Field(default=20, ge=1, description="T (número de blocos)")
    lambda_ent: float = Field(default=2.0, ge=0, description="Peso da entropia")
    epochs: int = Field(default=5, ge=0)
    freeze_epochs: int = Field(default=3, ge=0)
    lr_head: float = Field(default=1e-2, gt=0)
    lr_extractor: float = Field(default=4e-5, gt=0)
    weight_decay: float = Field(default=1e-4, ge=0)
    batch_size: int = Field(default=128, ge=2)
    mining_mode: MiningMode = Field(default=MiningMode.CHUNKED)
    subsample_normal: bool = Field(default=True, description="Subamostrar o maior grupo")
    literal_entropy_sign: bool = Field(
        default=False, description="Somar a entropia em vez de subtraí-la"
    )
    seed: int = Field(default=0)

    @model_validator(mode="after")
    def validate_epochs(self) -> "ScanConfig":
        if self.freeze_epochs > self.epochs:
            raise ValueError("freeze_epochs não pode exceder epochs")
        return self


class FinetuneConfig(BaseModel):
    """Ajuste fino supervisionado com poucas execuções rotuladas."""

    model_config = ConfigDict(extra="forbid")

    labeled_runs_per_state: int = Field(default=1, ge=1)
    epochs: int = Field(default=10, ge=0)
    lr: float = Field(default=1e-4, gt=0)
    weight_decay: float = Field(default=1e-4, ge=0)
    label_smoothing: float = Field(default=0.1, ge=0.0, lt=1.0, description="ε")
    batch_size: int = Field(default=128, ge=2)
    seed: int = Field(default=0)


class EpochStats(BaseModel):
    """Linha de log de uma época de pré-treino."""

    epoch: int
    loss_rec: float
    loss_cont: float
    loss_total: float
    wall_time: float = Field(default=0.0, exclude=True)


class ScanEpochStats(BaseModel):
    """Linha de log de uma época de clustering."""

    epoch: int
    loss: float
    consistency: float
    entropy: float
    frozen: bool
    wall_time: float = Field(default=0.0, exclude=True)


class FinetuneEpochStats(BaseModel):
    """Linha de log de uma época de ajuste fino."""

    epoch: int
    loss: float
    accuracy: float
    wall_time: float = Field(default=0.0, exclude=True)
