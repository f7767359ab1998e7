"""Service layer para métricas de clustering e de detecção/diagnóstico de falhas."""

from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score, rand_score

from sensorscan.schemas.data import NORMAL_STATE
from sensorscan.schemas.report import ClusteringMetrics, ContingencyTable, FaultRates, FddReport
from sensorscan.utils.errors import ShapeError, ValidationError


def _check_pair(y: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    if y.shape != c.shape:
        raise ShapeError(f"rótulos {y.shape} e clusters {c.shape} desalinhados")
    if y.size == 0:
        raise ValidationError("métricas exigem entrada não vazia")
    return y, c


def _rate(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


class MetricsService:
    """Service para ACC, NMI, ARI, RI e métricas FDD."""

    @staticmethod
    def contingency(y: np.ndarray, c: np.ndarray) -> ContingencyTable:
        """Tabela estado × cluster."""
        y, c = _check_pair(y, c)
        states, y_index = np.unique(y, return_inverse=True)
        clusters, c_index = np.unique(c, return_inverse=True)
        counts = np.zeros((states.size, clusters.size), dtype=np.int64)
        np.add.at(counts, (y_index, c_index), 1)
        return ContingencyTable(
            states=states.tolist(), clusters=clusters.tolist(), counts=counts.tolist()
        )

    @staticmethod
    def acc(y: np.ndarray, c: np.ndarray) -> float:
        """Acurácia do melhor casamento um-para-um (algoritmo húngaro)."""
        table = MetricsService.contingency(y, c)
        rows, cols = linear_sum_assignment(-table.matrix)
        return float(table.matrix[rows, cols].sum() / table.total)

    @staticmethod
    def nmi(y: np.ndarray, c: np.ndarray) -> float:
        """
        2·I(Y;C) / (H(Y) + H(C)).

        Duas partições triviais idênticas valem 1; se apenas uma tem entropia
        nula, o valor é 0.
        """
        y, c = _check_pair(y, c)
        trivial_y = np.unique(y).size == 1
        trivial_c = np.unique(c).size == 1
        if trivial_y and trivial_c:
            return 1.0
        if trivial_y or trivial_c:
            return 0.0
        return float(normalized_mutual_info_score(y, c, average_method="arithmetic"))

    @staticmethod
    def ari(y: np.ndarray, c: np.ndarray) -> float:
        y, c = _check_pair(y, c)
        return float(adjusted_rand_score(y, c))

    @staticmethod
    def ri(y: np.ndarray, c: np.ndarray) -> float:
        y, c = _check_pair(y, c)
        return float(rand_score(y, c))

    @staticmethod
    def clustering_metrics(y: np.ndarray, c: np.ndarray) -> ClusteringMetrics:
        return ClusteringMetrics(
            acc=MetricsService.acc(y, c),
            nmi=MetricsService.nmi(y, c),
            ari=MetricsService.ari(y, c),
            ri=MetricsService.ri(y, c),
        )

    @staticmethod
    def average_detection_delay(
        y_true: np.ndarray,
        y_pred: np.ndarray,
        run_ids: np.ndarray,
        end_indices: np.ndarray,
        step_size: int = 1,
    ) -> tuple[Optional[float], int, int]:
        """
        Atraso médio entre a primeira janela com falha e a primeira predição de falha.

        Execuções nunca detectadas são excluídas.

        Returns:
            tuple: (ADD em amostras ou None, execuções com falha, execuções detectadas).
        """
        delays: list[int] = []
        n_faulty = 0
        for run in dict.fromkeys(run_ids.tolist()):
            positions = np.flatnonzero(run_ids == run)
            positions = positions[np.argsort(end_indices[positions], kind="stable")]
            truth = y_true[positions]
            faulty = np.flatnonzero(truth != NORMAL_STATE)
            if faulty.size == 0:
                continue
            n_faulty += 1
            first_true = int(faulty[0])
            alarms = np.flatnonzero(y_pred[positions][first_true:] != NORMAL_STATE)
            if alarms.size:
                delays.append(int(alarms[0]) * step_size)
        add = float(np.mean(delays)) if delays else None
        return add, n_faulty, len(delays)

    @staticmethod
    def fdd_metrics(
        y_true: np.ndarray,
        y_pred: np.ndarray,
        run_ids: np.ndarray,
        end_indices: np.ndarray,
        step_size: int = 1,
        sampling_period_min: float = 3.0,
    ) -> FddReport:
        """
        TPR/FPR por falha, TPR/FPR de detecção, CDR e ADD.

        Args:
            y_true: Estados verdadeiros das janelas.
            y_pred: Estados preditos.
            run_ids: Execução de cada janela.
            end_indices: Último timestamp de cada janela (ordena as janelas na execução).
            step_size: Passo do janelamento (ADD em amostras = janelas × passo).
            sampling_period_min: Minutos por amostra (ADD em minutos).

        Returns:
            FddReport: Relatório sem métricas de clustering.
        """
        y_true, y_pred = _check_pair(y_true, y_pred)
        run_ids = np.asarray(run_ids)
        end_indices = np.asarray(end_indices)
        normal = y_true == NORMAL_STATE
        faulty = ~normal
        n_normal = int(normal.sum())

        states = sorted((set(y_true.tolist()) | set(y_pred.tolist())) - {NORMAL_STATE})
        per_fault = []
        for state in states:
            of_state = y_true == state
            n_state = int(of_state.sum())
            per_fault.append(
                FaultRates(
                    state=state,
                    tpr=_rate(int((y_pred[of_state] == state).sum()), n_state),
                    fpr=_rate(int((y_pred[normal] == state).sum()), n_normal),
                    detection_tpr=_rate(int((y_pred[of_state] != NORMAL_STATE).sum()), n_state),
                    n_samples=n_state,
                )
            )

        detected = faulty & (y_pred != NORMAL_STATE)
        correct = faulty & (y_pred == y_true)
        add, n_faulty_runs, n_detected_runs = MetricsService.average_detection_delay(
            y_true, y_pred, run_ids, end_indices, step_size
        )
        return FddReport(
            per_fault=per_fault,
            detection_tpr=_rate(int(detected.sum()), int(faulty.sum())),
            detection_fpr=_rate(int((y_pred[normal] != NORMAL_STATE).sum()), n_normal),
            cdr=_rate(int(correct.sum()), int(detected.sum())),
            add_samples=add,
            add_minutes=add * sampling_period_min if add is not None else None,
            n_samples=int(y_true.size),
            n_faulty_runs=n_faulty_runs,
            n_detected_runs=n_detected_runs,
        )
