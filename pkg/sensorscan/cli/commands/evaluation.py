"""Comandos de avaliação: evaluate, ablate e report."""

import argparse
import json
from pathlib import Path

from sensorscan.config.artifacts import META_FILE
from sensorscan.core.dependencies import (
    get_artifacts_root,
    get_jobs,
    get_store,
    load_config,
)
from sensorscan.schemas.pipeline import AblationAxis
from sensorscan.schemas.report import FddReport
from sensorscan.services.experiment_service import ExperimentService
from sensorscan.services.pipeline_service import BASELINES, PipelineService
from sensorscan.services.report_service import ReportService
from sensorscan.utils.errors import EXIT_OK, ValidationError


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValidationError(f"lista de inteiros inválida: '{text}'") from exc


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Avalia o pipeline treinado no teste (ou N seeds completas com `--seeds`)."""
    cfg = load_config(args)
    if args.seeds is not None:
        aggregated = ExperimentService.run_seeds(
            cfg,
            get_artifacts_root(args),
            args.seeds,
            baseline=args.baseline,
            finetune=args.finetune,
            jobs=get_jobs(args),
        )
        for report in aggregated.values():
            print(ReportService.render_aggregated(report))
        return EXIT_OK

    reports = PipelineService.run_evaluate(cfg, get_store(args, cfg), baseline=args.baseline)
    for report in reports.values():
        print(ReportService.render_tables(report))
    if len(reports) > 1:
        print(ReportService.render_comparison(reports))
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    """Executa as variantes de um eixo e imprime a tabela comparativa."""
    cfg = load_config(args)
    clusters = _int_list(args.clusters) if args.clusters else None
    subsets = [_int_list(chunk) for chunk in args.subsets.split(";")] if args.subsets else None
    reports = ExperimentService.run_ablation(
        cfg,
        get_artifacts_root(args),
        AblationAxis(args.axis),
        clusters=clusters,
        subsets=subsets,
        jobs=get_jobs(args),
    )
    print(ReportService.render_comparison(reports, title=f"Ablação: {args.axis}"))
    return EXIT_OK


def _render_file(path: Path) -> str:
    payload = json.loads(path.read_text(encoding="utf-8"))
    if "seeds" in payload:
        return ReportService.render_aggregated(ReportService.load_aggregated(path))
    if "per_fault" in payload:
        return ReportService.render_tables(ReportService.load_report(path))
    reports = {name: FddReport.model_validate(body) for name, body in payload.items()}
    return ReportService.render_comparison(reports)


def cmd_report(args: argparse.Namespace) -> int:
    """Renderiza tabelas a partir de relatórios JSON gravados."""
    paths = [Path(p) for p in args.paths]
    if not paths:
        root = get_artifacts_root(args)
        paths = sorted(
            p
            for directory in (root / "evaluate", root / "aggregate")
            for p in directory.glob("*.json")
            if p.name != META_FILE
        )
    if not paths:
        raise ValidationError("nenhum relatório encontrado; execute 'evaluate' antes")
    for path in paths:
        if not path.is_file():
            raise ValidationError(f"relatório não encontrado: {path}")
        print(_render_file(path))
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    evaluate = subparsers.add_parser("evaluate", parents=[common], help="Avaliar no teste")
    evaluate.add_argument("--baseline", choices=BASELINES, default=None)
    evaluate.add_argument(
        "--seeds", type=int, default=None, help="Executar N seeds completas e agregar"
    )
    evaluate.add_argument(
        "--finetune", action="store_true", help="Com --seeds, incluir o ajuste fino"
    )
    evaluate.set_defaults(handler=cmd_evaluate)

    ablate = subparsers.add_parser("ablate", parents=[common], help="Comparar variantes")
    ablate.add_argument("--axis", required=True, choices=[a.value for a in AblationAxis])
    ablate.add_argument("--clusters", default=None, help="Valores de M̃, p.ex. '3,5,9,10'")
    ablate.add_argument(
        "--subsets", default=None, help="Estados do pré-treino, p.ex. '0,1;0,1,2'"
    )
    ablate.set_defaults(handler=cmd_ablate)

    report = subparsers.add_parser("report", parents=[common], help="Renderizar relatórios")
    report.add_argument("paths", nargs="*", help="Arquivos JSON de relatório")
    report.set_defaults(handler=cmd_report)
