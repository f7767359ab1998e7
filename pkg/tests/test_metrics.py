"""Testes para as métricas de clustering e de detecção/diagnóstico."""

from itertools import permutations

import numpy as np
import pytest

from sensorscan.services.metrics_service import MetricsService
from sensorscan.utils.errors import ShapeError, ValidationError


def exhaustive_acc(y: np.ndarray, c: np.ndarray) -> float:
    states = np.unique(y)
    clusters = np.unique(c)
    size = max(states.size, clusters.size)
    best = 0
    for perm in permutations(range(size), clusters.size):
        hits = sum(
            int(((c == cluster) & (y == states[target])).sum())
            for cluster, target in zip(clusters, perm)
            if target < states.size
        )
        best = max(best, hits)
    return best / y.size


def test_acc_reference_values():
    """Testa ACC em partições de referência."""
    y = np.array([0, 0, 1, 1])
    assert MetricsService.acc(y, np.array([0, 1, 0, 1])) == 0.5
    assert MetricsService.acc(y, np.array([7, 7, 3, 3])) == 1.0


def test_acc_matches_exhaustive_permutation():
    """Testa o algoritmo húngaro contra o máximo por permutação em 100 instâncias."""
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(5, 40))
        y = rng.integers(0, int(rng.integers(1, 6)), size=n)
        c = rng.integers(0, int(rng.integers(1, 7)), size=n)
        assert MetricsService.acc(y, c) == pytest.approx(exhaustive_acc(y, c), abs=1e-12)


def test_acc_is_invariant_to_relabeling(rng: np.random.Generator):
    """Testa a invariância a permutações de clusters e de rótulos."""
    y = rng.integers(0, 4, size=50)
    c = rng.integers(0, 4, size=50)
    perm = np.array([3, 1, 0, 2])
    base = MetricsService.acc(y, c)
    assert MetricsService.acc(perm[y], c) == pytest.approx(base)
    assert MetricsService.acc(y, perm[c]) == pytest.approx(base)


def test_nmi_cases():
    """Testa NMI: identidade, partição constante, independência e convenções triviais."""
    y = np.array([0, 0, 1, 1])
    assert MetricsService.nmi(y, y) == pytest.approx(1.0)
    assert MetricsService.nmi(y, np.zeros(4)) == 0.0
    assert MetricsService.nmi(y, np.array([0, 1, 0, 1])) == pytest.approx(0.0, abs=1e-12)
    assert MetricsService.nmi(np.zeros(4), np.zeros(4)) == 1.0


def test_ari_and_ri_reference_values():
    """Testa ARI e RI por contagem de pares."""
    y = np.array([0, 0, 1, 1])
    assert MetricsService.ari(y, y) == pytest.approx(1.0)
    assert MetricsService.ari(y, np.array([0, 1, 0, 1])) == pytest.approx(-0.5)
    assert MetricsService.ri(y, np.array([0, 1, 0, 1])) == pytest.approx(1 / 3)


def test_ari_of_random_partitions_is_near_zero():
    """Testa a correção ao acaso: média do ARI em partições independentes ≈ 0."""
    rng = np.random.default_rng(1)
    values = [
        MetricsService.ari(rng.integers(0, 4, size=60), rng.integers(0, 4, size=60))
        for _ in range(1000)
    ]
    assert abs(np.mean(values)) < 0.02


def test_metrics_reject_bad_inputs():
    """Testa entradas desalinhadas ou vazias."""
    with pytest.raises(ShapeError):
        MetricsService.acc(np.zeros(3), np.zeros(4))
    with pytest.raises(ValidationError):
        MetricsService.nmi(np.zeros(0), np.zeros(0))


def test_contingency_table():
    """Testa a tabela estado × cluster."""
    table = MetricsService.contingency(np.array([0, 0, 2, 2, 2]), np.array([1, 1, 1, 5, 5]))
    assert table.states == [0, 2]
    assert table.clusters == [1, 5]
    assert table.counts == [[2, 0], [1, 2]]
    assert table.total == 5


def faulty_run(run_id: str, length: int, onset: int, state: int) -> tuple:
    labels = np.where(np.arange(length) >= onset, state, 0)
    return labels, np.full(length, run_id), np.arange(length)


def test_add_single_run():
    """Testa ADD = 5: primeira janela com falha em 10, primeira predição de falha em 15."""
    y, runs, ends = faulty_run("a", 30, 10, 1)
    pred = np.where(np.arange(30) >= 15, 1, 0)
    add, n_faulty, n_detected = MetricsService.average_detection_delay(y, pred, runs, ends)
    assert (add, n_faulty, n_detected) == (5.0, 1, 1)


def test_add_excludes_undetected_runs_and_scales_by_step():
    """Testa ADD = 12: uma execução nunca detectada e outra com atraso 4, passo 3."""
    y_a, runs_a, ends_a = faulty_run("a", 20, 5, 1)
    y_b, runs_b, ends_b = faulty_run("b", 20, 8, 2)
    pred_a = np.zeros(20, dtype=np.int64)
    pred_b = np.where(np.arange(20) >= 12, 2, 0)
    y = np.concatenate([y_a, y_b])
    pred = np.concatenate([pred_a, pred_b])
    runs = np.concatenate([runs_a, runs_b])
    ends = np.concatenate([ends_a, ends_b])

    add, n_faulty, n_detected = MetricsService.average_detection_delay(
        y, pred, runs, ends, step_size=3
    )
    assert (add, n_faulty, n_detected) == (12.0, 2, 1)
    report = MetricsService.fdd_metrics(y, pred, runs, ends, step_size=3)
    assert report.add_samples == 12.0
    assert report.add_minutes == pytest.approx(36.0)


def test_add_is_none_without_detections():
    """Testa ADD indefinido quando nenhuma execução é detectada."""
    y, runs, ends = faulty_run("a", 10, 3, 1)
    add, n_faulty, n_detected = MetricsService.average_detection_delay(
        y, np.zeros(10, dtype=np.int64), runs, ends
    )
    assert add is None and n_faulty == 1 and n_detected == 0


def test_perfect_predictions():
    """Testa TPR 1, FPR 0, CDR 1 e ADD 0 para predições perfeitas."""
    parts = [faulty_run(f"r{s}", 15, 5, s) for s in (1, 2, 3)]
    normal = (np.zeros(15, dtype=np.int64), np.full(15, "n"), np.arange(15))
    y, runs, ends = (np.concatenate(arrays) for arrays in zip(normal, *parts))

    report = MetricsService.fdd_metrics(y, y.copy(), runs, ends)
    assert [rates.state for rates in report.per_fault] == [1, 2, 3]
    assert all(rates.tpr == 1.0 and rates.fpr == 0.0 for rates in report.per_fault)
    assert report.detection_tpr == 1.0
    assert report.detection_fpr == 0.0
    assert report.cdr == 1.0
    assert report.add_samples == 0.0
    assert report.n_faulty_runs == report.n_detected_runs == 3


def test_detection_tpr_is_sample_weighted_mean(rng: np.random.Generator):
    """Testa que o TPR de detecção é a média dos TPR de detecção ponderada pelas amostras."""
    y = rng.integers(0, 4, size=300)
    pred = rng.integers(0, 4, size=300)
    runs = np.full(300, "r")
    report = MetricsService.fdd_metrics(y, pred, runs, np.arange(300))
    weighted = sum(r.detection_tpr * r.n_samples for r in report.per_fault) / sum(
        r.n_samples for r in report.per_fault
    )
    assert report.detection_tpr == pytest.approx(weighted)


def test_false_positive_rates_count_normal_samples_only():
    """Testa FPR_i sobre amostras normais e a CDR sobre amostras detectadas."""
    y = np.array([0, 0, 0, 0, 1, 1, 2, 2])
    pred = np.array([0, 1, 2, 2, 1, 2, 2, 0])
    report = MetricsService.fdd_metrics(y, pred, np.full(8, "r"), np.arange(8))
    rates = {r.state: r for r in report.per_fault}
    assert rates[1].fpr == pytest.approx(0.25)
    assert rates[2].fpr == pytest.approx(0.5)
    assert rates[1].tpr == pytest.approx(0.5)
    assert report.detection_fpr == pytest.approx(0.75)
    assert report.detection_tpr == pytest.approx(0.75)
    assert report.cdr == pytest.approx(2 / 3)
