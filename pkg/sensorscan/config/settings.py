"""Configurações do processo usando Pydantic Settings."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configurações carregadas de variáveis de ambiente (prefixo SENSORSCAN_)."""

    model_config = SettingsConfigDict(
        env_prefix="SENSORSCAN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Artefatos
    artifacts_dir: Path = Field(
        default=Path("./artifacts"), description="Diretório base dos artefatos de cada etapa"
    )

    # Logging
    log_level: str = Field(default="INFO", description="Nível de log (DEBUG, INFO, WARNING...)")
    log_json: bool = Field(default=False, description="Emitir um objeto JSON por linha de log")

    # Execução
    jobs: int = Field(default=1, description="Número máximo de workers", ge=1, le=64)
    float_dtype: Literal["float64", "float32"] = Field(
        default="float64", description="Largura de ponto flutuante única do núcleo numérico"
    )
    default_seed: int = Field(default=0, description="Seed padrão quando a config não define")

    # Application
    app_name: str = Field(default="SensorSCAN", description="Nome da aplicação")
    app_version: str = Field(default="0.1.0", description="Versão da aplicação")

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: str | None) -> str:
        """Normaliza o nível de log para maiúsculas."""
        if not v:
            return "INFO"
        return str(v).strip().upper()

    def create_artifact_dirs(self) -> None:
        """Cria o diretório de artefatos se não existir."""
        self.artifacts_dir.mkdir(parents=True, exist_ok=True)


@lru_cache
def get_settings() -> Settings:
    """Retorna instância singleton de Settings."""
    return Settings()


settings = get_settings()
