"""Service layer para execuções multi-seed e ablações."""

import re
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Optional

from sensorscan.config.artifacts import ArtifactStore
from sensorscan.schemas.data import NORMAL_STATE
from sensorscan.schemas.pipeline import AblationAxis, DataSource, PipelineConfig
from sensorscan.schemas.report import AggregatedReport, FddReport
from sensorscan.schemas.training import MiningMode, SslTasks
from sensorscan.services.data_service import DataService
from sensorscan.services.pipeline_service import PipelineService
from sensorscan.services.report_service import ReportService
from sensorscan.utils.errors import ValidationError
from sensorscan.utils.logging import configure_logging, get_logger

logger = get_logger("experiment")

_SLUG = re.compile(r"[^A-Za-z0-9_-]+")


def _slug(name: str) -> str:
    return _SLUG.sub("_", name).strip("_") or "variant"


def _run_variant(args: tuple) -> tuple[str, dict[str, dict]]:
    """
    Executa o pipeline completo de uma variante (função de módulo para o process pool).

    Args:
        args: (nome, config JSON, diretório, baseline, finetune).

    Returns:
        tuple: (nome, relatório por variante de avaliação em JSON).
    """
    name, config_json, directory, baseline, finetune = args
    configure_logging()
    cfg = PipelineConfig.model_validate_json(config_json)
    store = ArtifactStore(directory, cfg.fingerprint(), cfg.seed)
    reports = PipelineService.run_all(cfg, store, baseline=baseline, finetune=finetune)
    return name, {variant: report.model_dump(mode="json") for variant, report in reports.items()}


def _run_many(jobs_args: list[tuple], jobs: int) -> dict[str, dict[str, FddReport]]:
    """Executa variantes em sequência ou em paralelo, preservando a ordem de entrada."""
    results: dict[str, dict[str, dict]] = {}
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(jobs_args))) as executor:
            futures = [executor.submit(_run_variant, args) for args in jobs_args]
            for future in as_completed(futures):
                name, payload = future.result()
                results[name] = payload
                logger.info(f"variante '{name}' concluída ({len(results)}/{len(jobs_args)})")
    else:
        for args in jobs_args:
            name, payload = _run_variant(args)
            results[name] = payload
            logger.info(f"variante '{name}' concluída ({len(results)}/{len(jobs_args)})")
    return {
        args[0]: {k: FddReport.model_validate(v) for k, v in results[args[0]].items()}
        for args in jobs_args
    }


class ExperimentService:
    """Service para múltiplas seeds (média ± desvio) e comparações de ablação."""

    @staticmethod
    def count_states(cfg: PipelineConfig) -> int:
        """Q a partir do gerador sintético ou dos Run-CSV de entrada."""
        if cfg.data.source == DataSource.SYNTHETIC:
            return cfg.data.synthetic.n_states
        labels = {
            run.fault_label
            for path in [*cfg.data.csv_paths, *cfg.data.test_csv_paths]
            for run in DataService.ingest_csv(path, cfg.data.sampling_period_min)
        }
        return max(labels) + 1

    @staticmethod
    def run_seeds(
        cfg: PipelineConfig,
        root: str | Path,
        n_seeds: int,
        baseline: Optional[str] = None,
        finetune: bool = False,
        jobs: int = 1,
    ) -> dict[str, AggregatedReport]:
        """
        Executa o pipeline para seeds cfg.seed, cfg.seed + 1, ... e agrega por variante.

        Cada seed grava em `<root>/seeds/seed_<s>/`; os agregados vão para `<root>/aggregate/`.
        """
        if n_seeds < 1:
            raise ValidationError("--seeds deve ser ≥ 1")
        root = Path(root)
        seeds = [cfg.seed + offset for offset in range(n_seeds)]
        jobs_args = [
            (
                str(seed),
                cfg.with_seed(seed).model_dump_json(),
                str(root / "seeds" / f"seed_{seed}"),
                baseline,
                finetune,
            )
            for seed in seeds
        ]
        per_seed = _run_many(jobs_args, jobs)

        aggregated: dict[str, AggregatedReport] = {}
        variants = sorted(set.intersection(*(set(r) for r in per_seed.values())))
        for variant in variants:
            report = ReportService.aggregate_reports(
                [per_seed[str(seed)][variant] for seed in seeds], seeds
            )
            ReportService.save_aggregated(report, root / "aggregate")
            aggregated[variant] = report
        logger.info(f"{n_seeds} seeds agregadas em {root / 'aggregate'}")
        return aggregated

    @staticmethod
    def ablation_variants(
        cfg: PipelineConfig,
        axis: AblationAxis,
        clusters: Optional[list[int]] = None,
        subsets: Optional[list[list[int]]] = None,
    ) -> dict[str, PipelineConfig]:
        """
        Configurações de cada variante do eixo, todas com a mesma seed e divisão.

        Args:
            cfg: Configuração base.
            axis: Eixo da ablação.
            clusters: Valores de M̃ (padrão: Q − 2, Q, Q + 4, 2Q).
            subsets: Conjuntos de estados do pré-treino (padrão: todos, sem pré-treino,
                só normal e metade das falhas).

        Returns:
            dict[str, PipelineConfig]: Configuração por nome de variante.
        """
        if axis == AblationAxis.SSL_TASKS:
            names = {
                SslTasks.RECONSTRUCTION: "reconstruction-only",
                SslTasks.CONTRASTIVE: "contrastive-only",
                SslTasks.BOTH: "both",
            }
            return {
                name: cfg.updated({"pretrain": {"tasks": tasks.value}})
                for tasks, name in names.items()
            }

        if axis == AblationAxis.MINING:
            return {
                mode.value: cfg.updated({"scan": {"mining_mode": mode.value}})
                for mode in (MiningMode.CHUNKED, MiningMode.NAIVE)
            }

        n_states = ExperimentService.count_states(cfg)
        if axis == AblationAxis.N_CLUSTERS:
            values = clusters or [n_states - 2, n_states, n_states + 4, 2 * n_states]
            variants: dict[str, PipelineConfig] = {}
            for value in dict.fromkeys(values):
                if value < 2:
                    logger.warning(f"M̃={value} ignorado (mínimo 2)")
                    continue
                variants[f"M={value}"] = cfg.updated(
                    {"model": {"n_clusters": value}, "eval": {"unmatched": "normal"}}
                )
            return variants

        if axis == AblationAxis.FAULT_SUBSET:
            if subsets is not None:
                return {
                    "states=" + ",".join(map(str, subset)): cfg.updated(
                        {"pretrain": {"pretrain_states": sorted(subset)}}
                    )
                    for subset in subsets
                }
            half = [NORMAL_STATE, *range(1, 1 + (n_states - 1) // 2)]
            return {
                "all": cfg.updated({"pretrain": {"pretrain_states": None, "untrained": False}}),
                "untrained": cfg.updated({"pretrain": {"untrained": True}}),
                "normal-only": cfg.updated({"pretrain": {"pretrain_states": [NORMAL_STATE]}}),
                "half": cfg.updated({"pretrain": {"pretrain_states": half}}),
            }

        raise ValidationError(f"eixo de ablação desconhecido: {axis}")

    @staticmethod
    def run_ablation(
        cfg: PipelineConfig,
        root: str | Path,
        axis: AblationAxis,
        clusters: Optional[list[int]] = None,
        subsets: Optional[list[list[int]]] = None,
        jobs: int = 1,
    ) -> dict[str, FddReport]:
        """
        Executa cada variante do eixo e grava a tabela comparativa em `<root>/ablation/<eixo>/`.

        Returns:
            dict[str, FddReport]: Relatório não supervisionado por variante.
        """
        variants = ExperimentService.ablation_variants(cfg, axis, clusters, subsets)
        directory = Path(root) / "ablation" / axis.value
        jobs_args = [
            (name, variant.model_dump_json(), str(directory / _slug(name)), None, False)
            for name, variant in variants.items()
        ]
        logger.info(f"ablação '{axis.value}': {len(jobs_args)} variantes")
        results = _run_many(jobs_args, jobs)
        reports = {name: results[name]["sensorscan"] for name in variants}
        ReportService.save_comparison(reports, directory, title=f"Ablação: {axis.value}")
        return reports
