"""Schema Pydantic da arquitetura da rede."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ModelConfig(BaseModel):
    """Hiperparâmetros do extrator (encoder + pooling + projeção) e das cabeças."""

    model_config = ConfigDict(extra="forbid")

    n_layers: int = Field(default=3, ge=1, description="Camadas do encoder Transformer")
    hidden_dim: int = Field(default=128, ge=2, description="H")
    ff_dim: int = Field(default=512, ge=1, description="Dimensão do feed-forward")
    heads: int = Field(default=4, ge=1, description="Cabeças de atenção")
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    embedding_dim: int = Field(default=32, ge=2, description="F")
    n_clusters: int = Field(default=21, ge=2, description="M̃")
    n_channels: int = Field(default=30, ge=1, description="D")
    window_size: int = Field(default=100, ge=1, description="L")
    projection_dim: int | None = Field(
        default=None, ge=1, description="Largura oculta da projeção (padrão: H)"
    )
    cluster_hidden_dim: int | None = Field(
        default=None, ge=1, description="Largura oculta da cabeça de cluster (padrão: F)"
    )

    @model_validator(mode="after")
    def validate_architecture(self) -> "ModelConfig":
        if self.hidden_dim % 2 != 0:
            raise ValueError("hidden_dim (H) deve ser par para o encoding posicional")
        if self.hidden_dim % self.heads != 0:
            raise ValueError("hidden_dim (H) deve ser divisível por heads")
        return self

    @property
    def projection_hidden(self) -> int:
        return self.projection_dim or self.hidden_dim

    @property
    def cluster_hidden(self) -> int:
        return self.cluster_hidden_dim or self.embedding_dim
