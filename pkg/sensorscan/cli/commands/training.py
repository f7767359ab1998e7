"""Comandos de treino: pretrain, mine, cluster, match, finetune e run."""

import argparse
import json

from sensorscan.core.dependencies import get_jobs, get_store, load_config
from sensorscan.services.pipeline_service import BASELINES, PipelineService
from sensorscan.services.report_service import ReportService
from sensorscan.utils.errors import EXIT_OK

RESUMABLE = ("pretrain", "cluster", "finetune")


def _add_resume(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--resume",
        action="store_true",
        help="Continuar o treino do último checkpoint por época da mesma configuração",
    )


def cmd_pretrain(args: argparse.Namespace) -> int:
    """Pré-treino auto-supervisionado do extrator."""
    cfg = load_config(args)
    PipelineService.run_pretrain(cfg, get_store(args, cfg), resume=args.resume)
    return EXIT_OK


def cmd_mine(args: argparse.Namespace) -> int:
    """Embeddings, subamostragem do maior grupo e mineração de vizinhos."""
    cfg = load_config(args)
    kept = PipelineService.run_mine(cfg, get_store(args, cfg), jobs=get_jobs(args))
    print(json.dumps({"samples": int(kept.size)}))
    return EXIT_OK


def cmd_cluster(args: argparse.Namespace) -> int:
    """Treino de clustering com a perda SCAN."""
    cfg = load_config(args)
    final_loss = PipelineService.run_cluster(cfg, get_store(args, cfg), resume=args.resume)
    print(json.dumps({"final_loss": final_loss}))
    return EXIT_OK


def cmd_match(args: argparse.Namespace) -> int:
    """Mapeamento cluster → estado no conjunto de treino."""
    cfg = load_config(args)
    label_map = PipelineService.run_match(cfg, get_store(args, cfg))
    print(json.dumps({str(k): v for k, v in sorted(label_map.mapping.items())}))
    return EXIT_OK


def cmd_finetune(args: argparse.Namespace) -> int:
    """Ajuste fino com poucas execuções rotuladas por estado."""
    cfg = load_config(args)
    PipelineService.run_finetune(cfg, get_store(args, cfg), resume=args.resume)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    """Todas as etapas em sequência, terminando na avaliação."""
    cfg = load_config(args)
    reports = PipelineService.run_all(
        cfg,
        get_store(args, cfg),
        baseline=args.baseline,
        finetune=args.finetune,
        jobs=get_jobs(args),
        resume=args.resume,
    )
    for report in reports.values():
        print(ReportService.render_tables(report))
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    for name, handler, text in (
        ("pretrain", cmd_pretrain, "Pré-treinar o extrator"),
        ("mine", cmd_mine, "Minerar vizinhos"),
        ("cluster", cmd_cluster, "Treinar o clustering"),
        ("match", cmd_match, "Mapear clusters a estados"),
        ("finetune", cmd_finetune, "Ajuste fino supervisionado"),
    ):
        parser = subparsers.add_parser(name, parents=[common], help=text)
        if name in RESUMABLE:
            _add_resume(parser)
        parser.set_defaults(handler=handler)

    run = subparsers.add_parser("run", parents=[common], help="Executar o pipeline completo")
    run.add_argument("--baseline", choices=BASELINES, default=None)
    run.add_argument("--finetune", action="store_true", help="Incluir o ajuste fino")
    _add_resume(run)
    run.set_defaults(handler=cmd_run)
