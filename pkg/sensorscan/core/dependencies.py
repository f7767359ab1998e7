"""Dependências compartilhadas pelos comandos da CLI."""

import argparse
from pathlib import Path
from typing import Any

from pydantic import ValidationError as PydanticValidationError

from sensorscan.config.artifacts import ArtifactStore
from sensorscan.config.settings import settings
from sensorscan.schemas.pipeline import PipelineConfig
from sensorscan.utils.errors import ValidationError


def _invalid(exc: PydanticValidationError, source: str) -> ValidationError:
    errors = exc.errors(include_url=False)
    first = errors[0] if errors else {}
    location = ".".join(str(part) for part in first.get("loc", ()))
    return ValidationError(
        f"configuração inválida ({source}): {location} {first.get('msg', '')}".strip(),
        details={"errors": [{k: str(v) for k, v in e.items()} for e in errors]},
    )


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Carrega e valida a configuração do pipeline.

    A seed global (da config ou de `--seed`) é propagada a todas as seções.

    Args:
        args: Argumentos da CLI (`config`, `seed`).

    Returns:
        PipelineConfig: Configuração validada.

    Raises:
        ValidationError: Arquivo ausente, JSON inválido ou valores fora do schema.
    """
    path = getattr(args, "config", None)
    if path is not None and not Path(path).is_file():
        raise ValidationError(f"arquivo de configuração não encontrado: {path}")
    try:
        if path:
            cfg = PipelineConfig.from_json_file(path)
        else:
            cfg = PipelineConfig(seed=settings.default_seed)
    except PydanticValidationError as exc:
        raise _invalid(exc, str(path)) from exc
    seed = getattr(args, "seed", None)
    return cfg.with_seed(cfg.seed if seed is None else seed)


def apply_overrides(cfg: PipelineConfig, patch: dict[str, Any]) -> PipelineConfig:
    """Aplica sobrescritas vindas de flags da CLI, revalidando o schema."""
    if not patch:
        return cfg
    try:
        return cfg.updated(patch)
    except PydanticValidationError as exc:
        raise _invalid(exc, "flags") from exc


def get_artifacts_root(args: argparse.Namespace) -> Path:
    """Diretório de `--artifacts-dir` ou, na ausência, o das settings (criado se preciso)."""
    root = getattr(args, "artifacts_dir", None)
    if root:
        return Path(root)
    settings.create_artifact_dirs()
    return Path(settings.artifacts_dir)


def get_store(args: argparse.Namespace, cfg: PipelineConfig) -> ArtifactStore:
    """ArtifactStore da configuração atual."""
    return ArtifactStore(get_artifacts_root(args), cfg.fingerprint(), cfg.seed)


def get_jobs(args: argparse.Namespace) -> int:
    jobs = getattr(args, "jobs", None) or settings.jobs
    if jobs < 1:
        raise ValidationError("--jobs deve ser ≥ 1")
    return jobs
