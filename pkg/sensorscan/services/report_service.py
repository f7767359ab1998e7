"""Service layer para montagem, persistência e renderização de relatórios FDD."""

import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from sensorscan.schemas.report import (
    AggregatedReport,
    ClusteringMetrics,
    FddReport,
    MetricSummary,
)
from sensorscan.utils.errors import ValidationError
from sensorscan.utils.logging import get_logger

logger = get_logger("report")

AGGREGATE_ROWS = ("Detection TPR", "Detection FPR", "CDR", "ADD")

_SUMMARY_FIELDS = (
    "detection_tpr",
    "detection_fpr",
    "cdr",
    "add_samples",
    "add_minutes",
    "n_unmatched",
)
_CLUSTERING_FIELDS = ("acc", "nmi", "ari", "ri")


def _fmt(value: Optional[float], digits: int = 2) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def _fmt_summary(summary: Optional[MetricSummary]) -> str:
    if summary is None or summary.mean is None:
        return "n/a"
    return f"{summary.mean:.2f} ± {summary.std:.2f}"


def _table(title: str, headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Tabela de texto alinhada: primeira coluna à esquerda, demais à direita."""
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = [cell.rjust(width) for cell, width in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest]).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    return "\n".join([title, rule, line(headers), rule, *(line(r) for r in rows), rule])


def _summarize(values: list[Optional[float]]) -> MetricSummary:
    present = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if present.size == 0:
        return MetricSummary(mean=None, std=None, n=0)
    return MetricSummary(mean=float(present.mean()), std=float(present.std()), n=int(present.size))


def _write_json(payload: dict, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return path


class ReportService:
    """Service para relatórios estruturados (JSON) e tabelas de texto."""

    @staticmethod
    def build_report(
        fdd: FddReport,
        clustering: Optional[ClusteringMetrics] = None,
        variant: str = "sensorscan",
        config_fingerprint: Optional[str] = None,
    ) -> FddReport:
        """Anexa métricas de clustering, nome da variante e fingerprint ao relatório FDD."""
        return fdd.model_copy(
            update={
                "clustering": clustering,
                "variant": variant,
                "config_fingerprint": config_fingerprint,
            }
        )

    @staticmethod
    def render_tables(report: FddReport) -> str:
        """
        Renderiza o relatório em três blocos: por falha, agregado e clustering.

        Taxas usam duas casas decimais; métricas indefinidas aparecem como "n/a".
        """
        per_fault = _table(
            f"[{report.variant}] Taxas por falha",
            ["Falha", "TPR", "FPR"],
            [[str(r.state), _fmt(r.tpr), _fmt(r.fpr)] for r in report.per_fault],
        )
        add = _fmt(report.add_samples)
        if report.add_minutes is not None:
            add += f" ({_fmt(report.add_minutes)} min)"
        aggregate = _table(
            f"[{report.variant}] Métricas agregadas",
            ["Métrica", "Valor"],
            [
                [AGGREGATE_ROWS[0], _fmt(report.detection_tpr)],
                [AGGREGATE_ROWS[1], _fmt(report.detection_fpr)],
                [AGGREGATE_ROWS[2], _fmt(report.cdr)],
                [AGGREGATE_ROWS[3], add],
            ],
        )
        blocks = [per_fault, aggregate]
        if report.clustering is not None:
            c = report.clustering
            blocks.append(
                _table(
                    f"[{report.variant}] Clustering",
                    ["ACC", "NMI", "ARI", "RI"],
                    [[_fmt(c.acc), _fmt(c.nmi), _fmt(c.ari), _fmt(c.ri)]],
                )
            )
        return "\n\n".join(blocks) + "\n"

    @staticmethod
    def save_report(report: FddReport, directory: str | Path, name: Optional[str] = None) -> Path:
        """
        Grava `<name>.json` (chaves ordenadas) e `<name>.txt` (tabelas).

        Returns:
            Path: Caminho do JSON.
        """
        directory = Path(directory)
        name = name or report.variant
        path = _write_json(report.model_dump(mode="json"), directory / f"{name}.json")
        (directory / f"{name}.txt").write_text(
            ReportService.render_tables(report), encoding="utf-8"
        )
        return path

    @staticmethod
    def load_report(path: str | Path) -> FddReport:
        """Lê um relatório JSON e valida o schema."""
        path = Path(path)
        try:
            return FddReport.model_validate_json(path.read_text(encoding="utf-8"))
        except PydanticValidationError as exc:
            raise ValidationError(
                f"relatório inválido em {path}", details={"errors": exc.errors(include_url=False)}
            ) from exc

    @staticmethod
    def aggregate_reports(reports: list[FddReport], seeds: list[int]) -> AggregatedReport:
        """
        Média ± desvio padrão (populacional) de cada métrica sobre as seeds.

        Métricas indefinidas em uma seed são ignoradas naquela seed.
        """
        if not reports:
            raise ValidationError("nenhum relatório para agregar")
        if len(reports) != len(seeds):
            raise ValidationError("um relatório por seed é obrigatório")

        metrics = {
            name: _summarize([getattr(r, name) for r in reports]) for name in _SUMMARY_FIELDS
        }
        if all(r.clustering is not None for r in reports):
            for name in _CLUSTERING_FIELDS:
                metrics[name] = _summarize([getattr(r.clustering, name) for r in reports])

        states = sorted({rates.state for r in reports for rates in r.per_fault})
        per_fault_tpr: dict[int, MetricSummary] = {}
        per_fault_fpr: dict[int, MetricSummary] = {}
        for state in states:
            rates = [next((x for x in r.per_fault if x.state == state), None) for r in reports]
            per_fault_tpr[state] = _summarize([x.tpr if x else None for x in rates])
            per_fault_fpr[state] = _summarize([x.fpr if x else None for x in rates])

        return AggregatedReport(
            variant=reports[0].variant,
            seeds=list(seeds),
            metrics=metrics,
            per_fault_tpr=per_fault_tpr,
            per_fault_fpr=per_fault_fpr,
        )

    @staticmethod
    def render_aggregated(report: AggregatedReport) -> str:
        """Mesmos blocos de `render_tables`, com média ± desvio."""
        seeds = ",".join(str(s) for s in report.seeds)
        per_fault = _table(
            f"[{report.variant}] Taxas por falha (seeds {seeds})",
            ["Falha", "TPR", "FPR"],
            [
                [
                    str(state),
                    _fmt_summary(report.per_fault_tpr.get(state)),
                    _fmt_summary(report.per_fault_fpr.get(state)),
                ]
                for state in sorted(report.per_fault_tpr)
            ],
        )
        m = report.metrics
        aggregate = _table(
            f"[{report.variant}] Métricas agregadas (seeds {seeds})",
            ["Métrica", "Valor"],
            [
                [AGGREGATE_ROWS[0], _fmt_summary(m.get("detection_tpr"))],
                [AGGREGATE_ROWS[1], _fmt_summary(m.get("detection_fpr"))],
                [AGGREGATE_ROWS[2], _fmt_summary(m.get("cdr"))],
                [AGGREGATE_ROWS[3], _fmt_summary(m.get("add_samples"))],
            ],
        )
        blocks = [per_fault, aggregate]
        if "acc" in m:
            blocks.append(
                _table(
                    f"[{report.variant}] Clustering (seeds {seeds})",
                    [name.upper() for name in _CLUSTERING_FIELDS],
                    [[_fmt_summary(m.get(name)) for name in _CLUSTERING_FIELDS]],
                )
            )
        return "\n\n".join(blocks) + "\n"

    @staticmethod
    def save_aggregated(report: AggregatedReport, directory: str | Path) -> Path:
        directory = Path(directory)
        path = _write_json(report.model_dump(mode="json"), directory / f"{report.variant}.json")
        (directory / f"{report.variant}.txt").write_text(
            ReportService.render_aggregated(report), encoding="utf-8"
        )
        return path

    @staticmethod
    def load_aggregated(path: str | Path) -> AggregatedReport:
        path = Path(path)
        try:
            return AggregatedReport.model_validate_json(path.read_text(encoding="utf-8"))
        except PydanticValidationError as exc:
            raise ValidationError(
                f"relatório agregado inválido em {path}",
                details={"errors": exc.errors(include_url=False)},
            ) from exc

    @staticmethod
    def render_comparison(reports: dict[str, FddReport], title: str = "Comparação") -> str:
        """Uma linha por variante (ablações e baseline lado a lado)."""
        rows = []
        for name, report in reports.items():
            c = report.clustering
            rows.append(
                [
                    name,
                    _fmt(c.acc if c else None),
                    _fmt(c.nmi if c else None),
                    _fmt(c.ari if c else None),
                    _fmt(report.detection_tpr),
                    _fmt(report.detection_fpr),
                    _fmt(report.cdr),
                    _fmt(report.add_samples),
                    str(report.n_unmatched),
                ]
            )
        headers = ["Variante", "ACC", "NMI", "ARI", *AGGREGATE_ROWS, "Sem estado"]
        return _table(title, headers, rows) + "\n"

    @staticmethod
    def save_comparison(
        reports: dict[str, FddReport], directory: str | Path, title: str = "Comparação"
    ) -> Path:
        """Grava `comparison.json` (relatório por variante) e `comparison.txt`."""
        directory = Path(directory)
        payload = {name: report.model_dump(mode="json") for name, report in reports.items()}
        path = _write_json(payload, directory / "comparison.json")
        (directory / "comparison.txt").write_text(
            ReportService.render_comparison(reports, title), encoding="utf-8"
        )
        logger.info(f"comparação de {len(reports)} variantes gravada em {path}")
        return path
