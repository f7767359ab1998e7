"""Comandos de dados: synth, ingest e schema."""

import argparse
import json

from sensorscan.core.dependencies import apply_overrides, get_store, load_config
from sensorscan.schemas.pipeline import DataSource, PipelineConfig
from sensorscan.services.pipeline_service import PipelineService
from sensorscan.utils.errors import EXIT_OK, ValidationError


def cmd_synth(args: argparse.Namespace) -> int:
    """Gera execuções sintéticas e grava Run-CSV + manifesto."""
    cfg = load_config(args)
    if cfg.data.source != DataSource.SYNTHETIC:
        raise ValidationError("synth exige data.source = synthetic")
    if args.runs_per_state is not None:
        cfg = apply_overrides(cfg, {"data": {"runs_per_state": args.runs_per_state}})
    counts = PipelineService.run_data(cfg, get_store(args, cfg))
    print(json.dumps({"runs": sum(counts.values()), "runs_per_state": counts}, sort_keys=True))
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    """Lê Run-CSV de entrada (e opcionalmente de teste) para o store."""
    cfg = load_config(args)
    patch: dict = {}
    if args.csv:
        patch = {"data": {"source": DataSource.CSV.value, "csv_paths": args.csv}}
    if args.test_csv:
        patch.setdefault("data", {})["test_csv_paths"] = args.test_csv
    cfg = apply_overrides(cfg, patch)
    if cfg.data.source != DataSource.CSV:
        raise ValidationError("ingest exige data.source = csv ou --csv")
    counts = PipelineService.run_data(cfg, get_store(args, cfg))
    print(json.dumps({"runs": sum(counts.values()), "runs_per_state": counts}, sort_keys=True))
    return EXIT_OK


def cmd_schema(args: argparse.Namespace) -> int:
    """Imprime o JSON schema da configuração."""
    print(json.dumps(PipelineConfig.model_json_schema(), indent=2, sort_keys=True))
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    synth = subparsers.add_parser("synth", parents=[common], help="Gerar dados sintéticos")
    synth.add_argument("--runs-per-state", type=int, default=None, help="Execuções por estado")
    synth.set_defaults(handler=cmd_synth)

    ingest = subparsers.add_parser("ingest", parents=[common], help="Ler arquivos Run-CSV")
    ingest.add_argument("--csv", action="append", default=[], help="Run-CSV de treino")
    ingest.add_argument("--test-csv", action="append", default=[], help="Run-CSV de teste")
    ingest.set_defaults(handler=cmd_ingest)

    schema = subparsers.add_parser("schema", help="Imprimir o JSON schema da configuração")
    schema.set_defaults(handler=cmd_schema)
