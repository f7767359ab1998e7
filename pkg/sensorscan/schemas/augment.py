"""Schemas Pydantic para aumentos e máscaras."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class AugmentConfig(BaseModel):
    """Parâmetros de jitter, escala e permutação."""

    model_config = ConfigDict(extra="forbid")

    jitter_std: float = Field(default=0.08, ge=0.0, description="Desvio do ruído aditivo")
    scale_std: float = Field(default=0.1, ge=0.0, description="Desvio do fator de escala")
    scale_mean_weak: float = Field(default=2.0, description="Média da escala no aumento fraco")
    scale_mean_strong: float = Field(default=0.5, description="Média da escala no aumento forte")
    n_permute_chunks: int = Field(default=15, ge=1, description="Número de blocos da permutação")

    def validate_for_window(self, window_size: int) -> None:
        """Verifica 1 ≤ n_permute_chunks ≤ L."""
        if self.n_permute_chunks > window_size:
            raise ValueError(
                f"n_permute_chunks={self.n_permute_chunks} maior que a janela L={window_size}"
            )


class MaskConfig(BaseModel):
    """Máscara geométrica: razão mascarada r e comprimento médio mascarado l_m."""

    model_config = ConfigDict(extra="forbid")

    r: float = Field(default=0.5, gt=0.0, lt=1.0, description="Fração mascarada")
    l_m: float = Field(default=6.0, gt=1.0, description="Comprimento médio dos trechos mascarados")

    @model_validator(mode="after")
    def validate_lengths(self) -> "MaskConfig":
        if self.l_u < 1.0:
            raise ValueError(f"l_u = {self.l_u:.4f} < 1; aumente l_m ou reduza r")
        return self

    @property
    def l_u(self) -> float:
        """Comprimento médio dos trechos não mascarados: ((1 − r) / r) · l_m."""
        return (1.0 - self.r) / self.r * self.l_m
