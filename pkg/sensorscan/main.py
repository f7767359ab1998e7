"""Entry point da CLI SensorSCAN."""

import argparse
import sys
from typing import Optional, Sequence

from sensorscan.config.settings import settings
from sensorscan.utils.errors import EXIT_INTERNAL, SensorScanError
from sensorscan.utils.logging import configure_logging, get_logger

logger = get_logger("cli")


def _common_options() -> argparse.ArgumentParser:
    """Opções aceitas por todos os comandos do pipeline."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Arquivo JSON de configuração")
    common.add_argument("--seed", type=int, default=None, help="Seed global")
    common.add_argument("--jobs", type=int, default=None, help="Máximo de workers")
    common.add_argument(
        "--artifacts-dir", default=None, help="Diretório de artefatos (padrão: settings)"
    )
    common.add_argument("--log-level", default=None, help="Nível de log")
    return common


def create_application() -> argparse.ArgumentParser:
    """Factory para criar o parser da CLI com todos os comandos registrados."""
    parser = argparse.ArgumentParser(
        prog="sensorscan",
        description="Detecção e diagnóstico não supervisionado de falhas em sensores",
    )
    parser.add_argument(
        "--version", action="version", version=f"{settings.app_name} {settings.app_version}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_commands(subparsers, _common_options())
    return parser


def register_commands(
    subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser
) -> None:
    """Registra todos os comandos da aplicação."""
    from sensorscan.cli.commands import data, evaluation, training

    data.register(subparsers, common)
    training.register(subparsers, common)
    evaluation.register(subparsers, common)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Executa um comando e retorna o código de saída.

    0 sucesso, 1 erro interno, 2 entrada inválida, 3 artefato de etapa anterior ausente.
    """
    args = create_application().parse_args(argv)
    level = (getattr(args, "log_level", None) or settings.log_level).upper()
    configure_logging(level)
    try:
        return args.handler(args)
    except SensorScanError as exc:
        logger.error(f"{exc.code}: {exc.message}")
        if exc.details:
            logger.debug(f"detalhes: {exc.details}")
        return exc.exit_code
    except Exception as exc:
        debug = level == "DEBUG"
        logger.error(f"Erro interno: {exc}" if debug else "Erro interno")
        if debug:
            logger.exception("traceback")
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
