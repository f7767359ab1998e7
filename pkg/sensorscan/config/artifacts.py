"""Armazenamento de artefatos por etapa do pipeline."""

import json
from pathlib import Path
from typing import Any

from sensorscan.utils.errors import ConfigMismatchError, MissingArtifactError
from sensorscan.utils.logging import get_logger

from .settings import settings

logger = get_logger("artifacts")

META_FILE = "meta.json"


def write_json(payload: Any, path: Path) -> Path:
    """JSON com chaves ordenadas e quebra de linha final (bytes estáveis)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return path


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


class ArtifactStore:
    """
    Diretório `<root>/<stage>/` por etapa, com `meta.json` descrevendo quem o gerou.

    Uma etapa só é considerada concluída após `commit`; leituras validam o
    fingerprint da configuração que produziu o artefato.
    """

    def __init__(self, root: str | Path, fingerprint: str, seed: int):
        self.root = Path(root)
        self.fingerprint = fingerprint
        self.seed = seed

    def stage_dir(self, stage: str) -> Path:
        return self.root / stage

    def path(self, stage: str, name: str) -> Path:
        return self.stage_dir(stage) / name

    def begin(self, stage: str) -> Path:
        """Cria o diretório da etapa e invalida um `meta.json` anterior."""
        directory = self.stage_dir(stage)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / META_FILE).unlink(missing_ok=True)
        return directory

    def commit(self, stage: str, **extra: Any) -> Path:
        """Marca a etapa como concluída."""
        meta = {"stage": stage, "fingerprint": self.fingerprint, "seed": self.seed, **extra}
        path = write_json(meta, self.path(stage, META_FILE))
        logger.info(f"etapa '{stage}' concluída em {self.stage_dir(stage)}")
        return path

    def exists(self, stage: str) -> bool:
        return self.path(stage, META_FILE).is_file()

    def meta(self, stage: str) -> dict[str, Any]:
        return read_json(self.path(stage, META_FILE))

    def require(self, stage: str) -> Path:
        """
        Garante que a etapa foi concluída com a mesma configuração.

        Raises:
            MissingArtifactError: Etapa ausente.
            ConfigMismatchError: Etapa gerada com outra configuração.
        """
        if not self.exists(stage):
            raise MissingArtifactError(stage, details={"path": str(self.stage_dir(stage))})
        found = self.meta(stage).get("fingerprint", "")
        if found != self.fingerprint:
            raise ConfigMismatchError(stage, expected=self.fingerprint, found=found)
        return self.stage_dir(stage)

    def write_json(self, stage: str, name: str, payload: Any) -> Path:
        return write_json(payload, self.path(stage, name))

    def read_json(self, stage: str, name: str) -> Any:
        path = self.path(stage, name)
        if not path.is_file():
            raise MissingArtifactError(stage, details={"path": str(path)})
        return read_json(path)


def get_store(fingerprint: str, seed: int, root: str | Path | None = None) -> ArtifactStore:
    """Store sob `root` (padrão: settings.artifacts_dir)."""
    return ArtifactStore(root or settings.artifacts_dir, fingerprint, seed)
