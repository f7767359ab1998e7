"""Testes para o armazenamento de artefatos, as etapas do pipeline e os experimentos."""

import copy
import json
from pathlib import Path

import pytest

from sensorscan.config.artifacts import ArtifactStore
from sensorscan.nn import load_checkpoint
from sensorscan.schemas.data import FaultKind
from sensorscan.schemas.pipeline import AblationAxis, PipelineConfig, UnmatchedPolicy
from sensorscan.schemas.report import LabelMap
from sensorscan.schemas.training import SslTasks
from sensorscan.services.experiment_service import ExperimentService
from sensorscan.services.label_matching_service import LabelMatchingService
from sensorscan.services.pipeline_service import CKPT_MODEL, CKPT_PRETRAIN, PipelineService
from sensorscan.services.report_service import ReportService
from sensorscan.utils.errors import (
    ConfigMismatchError,
    MissingArtifactError,
    UnmatchedClusterError,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
DESK_CONFIG = CONFIGS / "desk.json"
HARD_FAULT_CONFIG = CONFIGS / "desk_hard_fault.json"


def test_store_requires_committed_stage(tmp_path):
    """Testa etapa ausente, etapa incompleta e fingerprint divergente."""
    store = ArtifactStore(tmp_path, fingerprint="aaa", seed=0)
    with pytest.raises(MissingArtifactError):
        store.require("data")

    store.begin("data")
    with pytest.raises(MissingArtifactError):
        store.require("data")

    store.commit("data", n_runs=3)
    assert store.require("data") == tmp_path / "data"
    assert store.meta("data") == {"stage": "data", "fingerprint": "aaa", "seed": 0, "n_runs": 3}

    other = ArtifactStore(tmp_path, fingerprint="bbb", seed=0)
    with pytest.raises(ConfigMismatchError):
        other.require("data")

    store.begin("data")
    assert not store.exists("data")


def test_fingerprint_and_seed_propagation(tiny_config: PipelineConfig):
    """Testa que a seed global chega a todas as seções e muda o fingerprint."""
    seeded = tiny_config.with_seed(7)
    assert seeded.pretrain.seed == seeded.scan.seed == seeded.finetune.seed == 7
    assert seeded.data.synthetic.seed == 7
    assert seeded.fingerprint() != tiny_config.fingerprint()
    assert tiny_config.with_seed(0).fingerprint() == tiny_config.fingerprint()


def test_data_stage_is_reproducible(tiny_config: PipelineConfig, tmp_path):
    """Testa que duas gerações produzem os mesmos bytes."""
    first = ArtifactStore(tmp_path / "a", tiny_config.fingerprint(), 0)
    second = ArtifactStore(tmp_path / "b", tiny_config.fingerprint(), 0)
    counts = PipelineService.run_data(tiny_config, first)
    PipelineService.run_data(tiny_config, second)
    assert counts == {0: 4, 1: 4, 2: 4}
    for name in ("runs.csv", "manifest.json", "meta.json"):
        assert first.path("data", name).read_bytes() == second.path("data", name).read_bytes()


def test_prepared_datasets(tiny_config: PipelineConfig, tmp_path):
    """Testa divisão estratificada e janelas do treino e do teste."""
    store = ArtifactStore(tmp_path, tiny_config.fingerprint(), 0)
    PipelineService.run_data(tiny_config, store)
    prepared = PipelineService.prepare_datasets(tiny_config, store)
    assert len(prepared.train_runs) == 9 and len(prepared.test_runs) == 3
    assert len(prepared.train) == 9 * 17
    assert len(prepared.test) == 3 * 17
    assert prepared.n_states == 3


def test_stages_in_order(tiny_config: PipelineConfig, tmp_path):
    """Testa o pipeline etapa por etapa e os arquivos de cada uma."""
    store = ArtifactStore(tmp_path, tiny_config.fingerprint(), 0)
    with pytest.raises(MissingArtifactError):
        PipelineService.run_cluster(tiny_config, store)

    reports = PipelineService.run_all(tiny_config, store, baseline="pca-kmeans", finetune=True)
    assert set(reports) == {"sensorscan", "finetuned", "pca-kmeans"}
    for stage in ("data", "pretrain", "mine", "cluster", "match", "finetune", "evaluate"):
        assert store.exists(stage)
    for stage, name in [
        ("pretrain", "extractor.ckpt"),
        ("mine", "neighbors.csv"),
        ("mine", "embeddings.csv"),
        ("mine", "projection_2d.csv"),
        ("cluster", "model.ckpt"),
        ("match", "label_map.csv"),
        ("evaluate", "sensorscan.json"),
        ("evaluate", "sensorscan.txt"),
    ]:
        assert store.path(stage, name).is_file(), f"{stage}/{name}"

    report = ReportService.load_report(store.path("evaluate", "sensorscan.json"))
    assert report == reports["sensorscan"]
    assert report.config_fingerprint == tiny_config.fingerprint()
    assert report.n_samples == 51
    assert 0.0 <= report.clustering.acc <= 1.0
    history = json.loads(store.path("pretrain", "history.json").read_text())
    assert [entry["epoch"] for entry in history] == [0]


def test_pipeline_is_deterministic(tiny_config: PipelineConfig, tmp_path):
    """Testa relatórios idênticos para a mesma seed."""
    first = PipelineService.run_all(
        tiny_config, ArtifactStore(tmp_path / "a", tiny_config.fingerprint(), 0)
    )
    second = PipelineService.run_all(
        tiny_config, ArtifactStore(tmp_path / "b", tiny_config.fingerprint(), 0)
    )
    assert first == second
    assert (tmp_path / "a" / "pretrain" / "extractor.ckpt").read_bytes() == (
        tmp_path / "b" / "pretrain" / "extractor.ckpt"
    ).read_bytes()


def test_ablation_variants(tiny_config: PipelineConfig):
    """Testa as variantes geradas por eixo."""
    tasks = ExperimentService.ablation_variants(tiny_config, AblationAxis.SSL_TASKS)
    assert list(tasks) == ["reconstruction-only", "contrastive-only", "both"]
    assert tasks["contrastive-only"].pretrain.tasks == SslTasks.CONTRASTIVE

    mining = ExperimentService.ablation_variants(tiny_config, AblationAxis.MINING)
    assert list(mining) == ["chunked", "naive"]

    clusters = ExperimentService.ablation_variants(
        tiny_config, AblationAxis.N_CLUSTERS, clusters=[1, 3, 6, 3]
    )
    assert list(clusters) == ["M=3", "M=6"]
    assert clusters["M=6"].model.n_clusters == 6
    assert clusters["M=6"].eval.unmatched == UnmatchedPolicy.NORMAL
    assert tiny_config.eval.unmatched == UnmatchedPolicy.RAISE

    subsets = ExperimentService.ablation_variants(tiny_config, AblationAxis.FAULT_SUBSET)
    assert list(subsets) == ["all", "untrained", "normal-only", "half"]
    assert subsets["half"].pretrain.pretrain_states == [0, 1]
    assert subsets["untrained"].pretrain.untrained

    explicit = ExperimentService.ablation_variants(
        tiny_config, AblationAxis.FAULT_SUBSET, subsets=[[2, 0]]
    )
    assert explicit["states=2,0"].pretrain.pretrain_states == [0, 2]


def test_run_seeds_aggregates_reports(tiny_config: PipelineConfig, tmp_path):
    """Testa o modo multi-seed: uma pasta por seed e agregado por variante."""
    aggregated = ExperimentService.run_seeds(tiny_config, tmp_path, n_seeds=2)
    assert set(aggregated) == {"sensorscan"}
    assert aggregated["sensorscan"].seeds == [0, 1]
    assert (tmp_path / "seeds" / "seed_1" / "evaluate" / "sensorscan.json").is_file()
    loaded = ReportService.load_aggregated(tmp_path / "aggregate" / "sensorscan.json")
    assert loaded == aggregated["sensorscan"]


@pytest.mark.slow
def test_mining_ablation_writes_comparison(tiny_config: PipelineConfig, tmp_path):
    """Testa a ablação de mineração com dois processos."""
    reports = ExperimentService.run_ablation(tiny_config, tmp_path, AblationAxis.MINING, jobs=2)
    assert list(reports) == ["chunked", "naive"]
    assert (tmp_path / "ablation" / "mining" / "comparison.txt").is_file()


@pytest.mark.slow
def test_desk_pipeline_meets_targets(tmp_path):
    """Testa ACC, detecção e TPR das falhas de degrau e deriva na configuração de bancada."""
    cfg = PipelineConfig.from_json_file(DESK_CONFIG)
    store = ArtifactStore(tmp_path, cfg.fingerprint(), cfg.seed)
    reports = PipelineService.run_all(cfg, store, baseline="pca-kmeans")
    report = reports["sensorscan"]
    assert report.clustering.acc >= 0.8
    assert report.detection_fpr <= 0.05
    assert report.detection_tpr >= 0.85
    tpr = {rates.state: rates.tpr for rates in report.per_fault}
    kinds = {i + 1: fault.kind for i, fault in enumerate(cfg.data.synthetic.faults)}
    for state, kind in kinds.items():
        if kind in (FaultKind.STEP, FaultKind.SLOW_DRIFT):
            assert tpr[state] >= 0.7, kind
    assert reports["pca-kmeans"].clustering is not None


@pytest.mark.slow
def test_overclustering_keeps_detection(tmp_path):
    """Testa M̃ = 2Q (queda de Detection TPR < 0.1) contra M̃ = Q − 2 (queda ≥ 0.1)."""
    cfg = PipelineConfig.from_json_file(DESK_CONFIG)
    n_states = cfg.data.synthetic.n_states
    reports = ExperimentService.run_ablation(
        cfg,
        tmp_path,
        AblationAxis.N_CLUSTERS,
        clusters=[n_states, 2 * n_states, n_states - 2],
    )
    reference = reports[f"M={n_states}"].detection_tpr
    assert reference - reports[f"M={2 * n_states}"].detection_tpr < 0.1
    assert reference - reports[f"M={n_states - 2}"].detection_tpr >= 0.1


@pytest.mark.slow
def test_finetuning_improves_hard_fault(tmp_path):
    """Testa ganho ≥ 0.1 de TPR na falha difícil, com FPR ≤ 0.05, em ao menos 3 de 5 seeds."""
    base = PipelineConfig.from_json_file(HARD_FAULT_CONFIG)
    hard_state = len(base.data.synthetic.faults)
    improved = 0
    for seed in range(5):
        cfg = base.with_seed(seed)
        store = ArtifactStore(tmp_path / f"seed_{seed}", cfg.fingerprint(), seed)
        reports = PipelineService.run_all(cfg, store, finetune=True)
        unsupervised = {r.state: r for r in reports["sensorscan"].per_fault}[hard_state]
        finetuned = {r.state: r for r in reports["finetuned"].per_fault}[hard_state]
        if finetuned.fpr <= 0.05 and finetuned.tpr - (unsupervised.tpr or 0.0) >= 0.1:
            improved += 1
    assert improved >= 3


class Interrupted(Exception):
    pass


def interrupt_after_first_epoch(monkeypatch) -> None:
    """Grava o checkpoint da primeira época e interrompe o treino logo depois."""
    original = PipelineService._save_state

    def save_then_stop(*args, **kwargs):
        original(*args, **kwargs)
        if args[5] == 1:
            raise Interrupted

    monkeypatch.setattr(PipelineService, "_save_state", staticmethod(save_then_stop))


@pytest.fixture
def two_epoch_config(tiny_config_dict: dict) -> PipelineConfig:
    data = copy.deepcopy(tiny_config_dict)
    data["pretrain"]["epochs"] = 2
    data["finetune"]["epochs"] = 2
    return PipelineConfig.model_validate(data)


def test_checkpoints_carry_optimizer_state(tiny_config: PipelineConfig, tmp_path):
    """Testa que os checkpoints de treino guardam o estado do Adam e as épocas feitas."""
    store = ArtifactStore(tmp_path, tiny_config.fingerprint(), 0)
    PipelineService.run_all(tiny_config, store, finetune=True)
    expected = [
        ("pretrain", CKPT_PRETRAIN, ["pretrain"], tiny_config.pretrain.epochs),
        ("cluster", CKPT_MODEL, ["extractor", "head"], tiny_config.scan.epochs),
        ("finetune", CKPT_MODEL, ["finetune"], tiny_config.finetune.epochs),
    ]
    for stage, name, optimizers, epochs in expected:
        checkpoint = load_checkpoint(store.path(stage, name))
        assert checkpoint.meta["epochs_done"] == epochs
        for optim_name in optimizers:
            state = checkpoint.section(f"optim/{optim_name}")
            assert int(state["step_count"]) > 0, f"{stage}/{optim_name}"
            assert any(key.startswith("m/") for key in state)


def test_interrupted_stages_resume_to_same_checkpoints(
    two_epoch_config: PipelineConfig, tmp_path, monkeypatch
):
    """Testa que retomar após uma interrupção reproduz os checkpoints da execução contínua."""
    cfg = two_epoch_config
    reference = ArtifactStore(tmp_path / "continuous", cfg.fingerprint(), 0)
    PipelineService.run_all(cfg, reference, finetune=True)

    store = ArtifactStore(tmp_path / "resumed", cfg.fingerprint(), 0)
    PipelineService.run_data(cfg, store)
    stages = [
        ("pretrain", CKPT_PRETRAIN, PipelineService.run_pretrain, PipelineService.run_mine),
        ("cluster", CKPT_MODEL, PipelineService.run_cluster, PipelineService.run_match),
        ("finetune", CKPT_MODEL, PipelineService.run_finetune, None),
    ]
    for stage, name, train, after in stages:
        with monkeypatch.context() as patch:
            interrupt_after_first_epoch(patch)
            with pytest.raises(Interrupted):
                train(cfg, store)
        assert not store.exists(stage)
        assert load_checkpoint(store.path(stage, name)).meta["epochs_done"] == 1

        train(cfg, store, resume=True)
        assert store.exists(stage)
        assert store.path(stage, name).read_bytes() == reference.path(stage, name).read_bytes()
        history = store.read_json(stage, "history.json")
        assert [entry["epoch"] for entry in history] == [0, 1]
        if after is not None:
            after(cfg, store)


def test_resume_ignores_checkpoint_of_other_config(
    tiny_config: PipelineConfig, two_epoch_config: PipelineConfig, tmp_path
):
    """Testa que um checkpoint de outra configuração não é retomado."""
    store = ArtifactStore(tmp_path, two_epoch_config.fingerprint(), 0)
    PipelineService.run_data(two_epoch_config, store)
    PipelineService.run_pretrain(two_epoch_config, store)

    other = ArtifactStore(tmp_path, tiny_config.fingerprint(), 0)
    PipelineService.run_data(tiny_config, other)
    PipelineService.run_pretrain(tiny_config, other, resume=True)
    checkpoint = load_checkpoint(other.path("pretrain", CKPT_PRETRAIN))
    assert checkpoint.meta["fingerprint"] == tiny_config.fingerprint()
    assert checkpoint.meta["epochs_done"] == tiny_config.pretrain.epochs


def unmatch_every_cluster(cfg: PipelineConfig, store: ArtifactStore) -> None:
    """Executa até o mapeamento e regrava o LabelMap sem estado para nenhum cluster."""
    PipelineService.run_data(cfg, store)
    PipelineService.run_pretrain(cfg, store)
    PipelineService.run_mine(cfg, store)
    PipelineService.run_cluster(cfg, store)
    PipelineService.run_match(cfg, store)
    empty = LabelMap(mapping={c: None for c in range(cfg.model.n_clusters)})
    LabelMatchingService.save_label_map(empty, store.path("match", "label_map.csv"))


def test_unmatched_clusters_raise_by_default(tiny_config: PipelineConfig, tmp_path):
    """Testa que, por padrão, a avaliação aborta em cluster sem estado."""
    store = ArtifactStore(tmp_path, tiny_config.fingerprint(), 0)
    unmatch_every_cluster(tiny_config, store)
    with pytest.raises(UnmatchedClusterError):
        PipelineService.run_evaluate(tiny_config, store)


def test_unmatched_clusters_counted_as_normal(tiny_config: PipelineConfig, tmp_path):
    """Testa a política que prevê normal e conta as amostras sem estado no relatório."""
    cfg = tiny_config.updated({"eval": {"unmatched": "normal"}})
    store = ArtifactStore(tmp_path, cfg.fingerprint(), 0)
    unmatch_every_cluster(cfg, store)
    report = PipelineService.run_evaluate(cfg, store)["sensorscan"]
    assert report.n_unmatched == report.n_samples == 51
    assert report.detection_tpr == 0.0
    assert report.detection_fpr == 0.0
    assert "Sem estado" in ReportService.render_comparison({"M=6": report})
