"""Configuração de logging com o formato de tags do projeto."""

import json
import logging
import sys
from typing import Any

from sensorscan.config.settings import settings

_configured = False


class JsonFormatter(logging.Formatter):
    """Formata cada registro como um objeto JSON em uma linha."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        fields = getattr(record, "fields", None)
        if fields:
            payload.update(fields)
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, default=str)


class TagFormatter(logging.Formatter):
    """Formato legível: ícone + [TAG] + mensagem + campos estruturados."""

    ICONS = {
        logging.DEBUG: "🔍",
        logging.INFO: "✅",
        logging.WARNING: "⚠️",
        logging.ERROR: "❌",
        logging.CRITICAL: "❌",
    }

    def format(self, record: logging.LogRecord) -> str:
        tag = record.name.rsplit(".", 1)[-1].upper()
        icon = self.ICONS.get(record.levelno, "•")
        line = f"{icon} [{tag}] {record.getMessage()}"
        fields = getattr(record, "fields", None)
        if fields:
            line += " " + json.dumps(fields, ensure_ascii=False, sort_keys=True, default=str)
        return line


def configure_logging(level: str | None = None, json_lines: bool | None = None) -> None:
    """
    Configura o logger raiz do pacote uma única vez.

    Args:
        level: Nível de log (padrão: settings.log_level).
        json_lines: Emitir JSON por linha (padrão: settings.log_json).
    """
    global _configured
    root = logging.getLogger("sensorscan")
    root.setLevel(level or settings.log_level)
    if _configured:
        return

    handler = logging.StreamHandler(sys.stderr)
    use_json = settings.log_json if json_lines is None else json_lines
    handler.setFormatter(JsonFormatter() if use_json else TagFormatter())
    root.addHandler(handler)
    root.propagate = False
    _configured = True


def get_logger(name: str) -> logging.Logger:
    """Retorna o logger `sensorscan.<name>`."""
    return logging.getLogger(f"sensorscan.{name}")


def log_event(logger: logging.Logger, message: str, **fields: Any) -> None:
    """Registra uma linha estruturada (mensagem + campos) em nível INFO."""
    logger.info(message, extra={"fields": fields})
