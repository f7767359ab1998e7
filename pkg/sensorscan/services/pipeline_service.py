"""Service layer que encadeia as etapas do pipeline sobre o ArtifactStore."""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from sensorscan.config.artifacts import ArtifactStore
from sensorscan.models.feature_extractor import (
    Classifier,
    FeatureExtractor,
    build_cluster_head,
    build_feature_extractor,
    build_pretrain_network,
)
from sensorscan.models.heads import ClusterHead
from sensorscan.nn import (
    Adam,
    Module,
    load_checkpoint,
    restore_module,
    restore_optimizer,
    save_checkpoint,
)
from sensorscan.schemas.data import NORMAL_STATE, NormalizationStats, SensorRun, WindowDataset
from sensorscan.schemas.pipeline import DataSource, PipelineConfig, UnmatchedPolicy
from sensorscan.schemas.report import FddReport, LabelMap
from sensorscan.schemas.training import EpochStats, FinetuneEpochStats, ScanEpochStats
from sensorscan.services.baseline_service import BaselineService
from sensorscan.services.clustering_service import ClusteringService
from sensorscan.services.data_service import DataService
from sensorscan.services.finetune_service import FinetuneService
from sensorscan.services.label_matching_service import LabelMatchingService
from sensorscan.services.metrics_service import MetricsService
from sensorscan.services.pretrain_service import PretrainService
from sensorscan.services.report_service import ReportService
from sensorscan.services.synthetic_service import SyntheticService
from sensorscan.utils.errors import ValidationError
from sensorscan.utils.logging import get_logger, log_event

logger = get_logger("pipeline")

STAGES = ("data", "pretrain", "mine", "cluster", "match", "finetune", "evaluate")
BASELINES = ("pca-kmeans",)

RUNS_FILE = "runs.csv"
TEST_RUNS_FILE = "test_runs.csv"
CKPT_PRETRAIN = "extractor.ckpt"
CKPT_MODEL = "model.ckpt"


@dataclass
class PreparedData:
    """Execuções divididas, normalizadas (estatísticas do treino) e janeladas."""

    train_runs: list[SensorRun]
    test_runs: list[SensorRun]
    stats: NormalizationStats
    train: WindowDataset
    test: WindowDataset
    n_states: int


@dataclass
class TrainingState:
    """Módulos e otimizadores nomeados de uma etapa treinável, mais o histórico por época."""

    modules: dict[str, Module]
    optimizers: dict[str, Adam]
    history: list[dict] = field(default_factory=list)


def _config_dump(cfg: PipelineConfig) -> dict:
    return cfg.model_dump(mode="json")


class PipelineService:
    """Service para as etapas data → pretrain → mine → cluster → match → evaluate."""

    # Dados

    @staticmethod
    def run_data(cfg: PipelineConfig, store: ArtifactStore) -> dict[int, int]:
        """
        Gera (sintético) ou lê (CSV) as execuções e grava Run-CSV + manifesto.

        Returns:
            dict[int, int]: Execuções por estado.
        """
        store.begin("data")
        data = cfg.data
        test_runs: list[SensorRun] = []
        if data.source == DataSource.SYNTHETIC:
            runs = SyntheticService.synth_generate(data.synthetic, data.runs_per_state)
        else:
            runs = [
                run
                for path in data.csv_paths
                for run in DataService.ingest_csv(path, data.sampling_period_min)
            ]
            test_runs = [
                run
                for path in data.test_csv_paths
                for run in DataService.ingest_csv(path, data.sampling_period_min)
            ]

        DataService.write_csv(runs, store.path("data", RUNS_FILE))
        if test_runs:
            DataService.write_csv(test_runs, store.path("data", TEST_RUNS_FILE))
        manifest = DataService.build_manifest(
            runs + test_runs,
            source=data.source.value,
            seed=data.synthetic.seed if data.synthetic is not None else None,
            config_fingerprint=store.fingerprint,
        )
        store.write_json("data", "manifest.json", manifest.model_dump(mode="json"))
        store.commit("data", n_runs=manifest.n_runs)
        log_event(logger, "dados gravados", n_runs=manifest.n_runs, source=manifest.source)
        return manifest.runs_per_state

    @staticmethod
    def prepare_datasets(cfg: PipelineConfig, store: ArtifactStore) -> PreparedData:
        """
        Recalcula de forma determinística a divisão, o desbalanceamento, a
        normalização (só com o treino) e as janelas a partir dos Run-CSV gravados.
        """
        store.require("data")
        data = cfg.data
        runs = DataService.ingest_csv(store.path("data", RUNS_FILE), data.sampling_period_min)
        runs = DataService.select_channels(runs, data.channels)
        test_path = store.path("data", TEST_RUNS_FILE)
        if test_path.is_file():
            train_runs = runs
            test_runs = DataService.select_channels(
                DataService.ingest_csv(test_path, data.sampling_period_min), data.channels
            )
        else:
            train_runs, test_runs = DataService.split_runs(runs, data.train_fraction, cfg.seed)
        if data.unbalance is not None:
            train_runs = DataService.unbalance_train(
                train_runs, data.unbalance.normal_count, data.unbalance.per_fault_count, cfg.seed
            )

        stats = DataService.compute_normalization(train_runs)
        train_runs = DataService.apply_normalization(train_runs, stats)
        test_runs = DataService.apply_normalization(test_runs, stats)
        labels = {run.fault_label for run in train_runs} | {run.fault_label for run in test_runs}
        return PreparedData(
            train_runs=train_runs,
            test_runs=test_runs,
            stats=stats,
            train=DataService.make_windows(train_runs, data.window_size, data.step),
            test=DataService.make_windows(test_runs, data.window_size, data.step),
            n_states=max(labels) + 1,
        )

    # Checkpoints

    @staticmethod
    def load_pretrained_extractor(cfg: PipelineConfig, store: ArtifactStore) -> FeatureExtractor:
        store.require("pretrain")
        checkpoint = load_checkpoint(store.path("pretrain", CKPT_PRETRAIN))
        extractor = build_feature_extractor(cfg.model, cfg.pretrain.seed)
        restore_module(extractor, "extractor", checkpoint)
        extractor.eval()
        return extractor

    @staticmethod
    def load_clustering_model(
        cfg: PipelineConfig, store: ArtifactStore
    ) -> tuple[FeatureExtractor, ClusterHead]:
        store.require("cluster")
        checkpoint = load_checkpoint(store.path("cluster", CKPT_MODEL))
        extractor = build_feature_extractor(cfg.model, cfg.pretrain.seed)
        head = build_cluster_head(cfg.model, cfg.scan.seed)
        restore_module(extractor, "extractor", checkpoint)
        restore_module(head, "head", checkpoint)
        extractor.eval()
        head.eval()
        return extractor, head

    @staticmethod
    def load_classifier(cfg: PipelineConfig, store: ArtifactStore) -> Classifier:
        store.require("finetune")
        checkpoint = load_checkpoint(store.path("finetune", CKPT_MODEL))
        n_states = int(checkpoint.meta["n_states"])
        extractor = build_feature_extractor(cfg.model, cfg.pretrain.seed)
        head = build_cluster_head(cfg.model, cfg.finetune.seed, n_outputs=n_states)
        restore_module(extractor, "extractor", checkpoint)
        restore_module(head, "head", checkpoint)
        classifier = Classifier(extractor, head)
        classifier.eval()
        return classifier

    # Estado de treino

    @staticmethod
    def _save_state(
        cfg: PipelineConfig,
        store: ArtifactStore,
        stage: str,
        name: str,
        state: TrainingState,
        epochs_done: int,
        **meta,
    ) -> None:
        save_checkpoint(
            store.path(stage, name),
            state.modules,
            config=_config_dump(cfg),
            optimizers=state.optimizers,
            meta={"fingerprint": store.fingerprint, "epochs_done": epochs_done, **meta},
        )

    @staticmethod
    def _resume_state(store: ArtifactStore, stage: str, name: str, state: TrainingState) -> dict:
        """
        Restaura módulos e otimizadores de um checkpoint da mesma configuração.

        Returns:
            dict: Metadados do checkpoint ({} quando não há o que retomar).
        """
        path = store.path(stage, name)
        if not path.is_file():
            return {}
        checkpoint = load_checkpoint(path)
        if checkpoint.meta.get("fingerprint") != store.fingerprint:
            logger.warning(f"checkpoint de '{stage}' de outra configuração: recomeçando")
            return {}
        for module_name, module in state.modules.items():
            restore_module(module, module_name, checkpoint)
        for optim_name, optimizer in state.optimizers.items():
            restore_optimizer(optimizer, optim_name, checkpoint)
        history_path = store.path(stage, "history.json")
        done = int(checkpoint.meta.get("epochs_done", 0))
        if history_path.is_file():
            state.history = store.read_json(stage, "history.json")[:done]
        log_event(logger, f"etapa '{stage}' retomada", epochs_done=done)
        return checkpoint.meta

    # Etapas

    @staticmethod
    def run_pretrain(
        cfg: PipelineConfig, store: ArtifactStore, resume: bool = False
    ) -> FeatureExtractor:
        """
        Pré-treino auto-supervisionado (ou extrator aleatório quando `untrained`).

        Rede, cabeça de reconstrução e Adam vão para `extractor.ckpt` ao fim de cada
        época; com `resume`, o treino continua da última época gravada.
        """
        prepared = PipelineService.prepare_datasets(cfg, store)
        network = build_pretrain_network(cfg.model, cfg.pretrain.seed)
        state = TrainingState(
            modules={"extractor": network.extractor, "reconstruction": network.reconstruction},
            optimizers={"pretrain": PretrainService.build_optimizer(network, cfg.pretrain)},
        )
        meta = (
            PipelineService._resume_state(store, "pretrain", CKPT_PRETRAIN, state) if resume else {}
        )
        start = int(meta.get("epochs_done", 0))
        store.begin("pretrain")
        windows = prepared.train
        if cfg.pretrain.pretrain_states is not None:
            windows = windows.filter_states(cfg.pretrain.pretrain_states)

        def checkpoint(stats: EpochStats) -> None:
            state.history.append(stats.model_dump(mode="json"))
            PipelineService._save_state(
                cfg, store, "pretrain", CKPT_PRETRAIN, state, stats.epoch + 1, windows=len(windows)
            )
            store.write_json("pretrain", "history.json", state.history)

        epochs_done = 0
        if cfg.pretrain.untrained:
            logger.warning("pré-treino desativado: extrator com pesos aleatórios")
            network.eval()
            extractor = network.extractor
        else:
            log_event(
                logger,
                "pré-treino iniciado",
                windows=len(windows),
                tasks=cfg.pretrain.tasks.value,
                epochs=cfg.pretrain.epochs,
                start_epoch=start,
            )
            extractor = PretrainService.pretrain(
                network,
                windows.values,
                cfg.pretrain,
                on_epoch=checkpoint,
                optimizer=state.optimizers["pretrain"],
                start_epoch=start,
            )
            epochs_done = cfg.pretrain.epochs

        PipelineService._save_state(
            cfg, store, "pretrain", CKPT_PRETRAIN, state, epochs_done, windows=len(windows)
        )
        store.write_json("pretrain", "history.json", state.history)
        store.write_json("pretrain", "normalization.json", prepared.stats.model_dump(mode="json"))
        store.commit("pretrain", windows=len(windows))
        return extractor

    @staticmethod
    def run_mine(cfg: PipelineConfig, store: ArtifactStore, jobs: int = 1) -> np.ndarray:
        """
        Embeddings do treino, subamostragem do maior grupo e mineração de vizinhos.

        Returns:
            np.ndarray: Índices (no treino) das amostras mantidas.
        """
        store.require("pretrain")
        prepared = PipelineService.prepare_datasets(cfg, store)
        extractor = PipelineService.load_pretrained_extractor(cfg, store)
        store.begin("mine")
        embeddings = extractor.embed(prepared.train.values)

        scan = cfg.scan
        if scan.subsample_normal:
            kept = ClusteringService.subsample_normal(embeddings, cfg.model.n_clusters, scan.seed)
        else:
            kept = np.arange(embeddings.shape[0])
        index = ClusteringService.mine_neighbors(
            embeddings[kept], scan.n_neighbors, scan.n_chunks, scan.mining_mode, scan.seed, jobs
        )

        ClusteringService.save_neighbors(index, store.path("mine", "neighbors.csv"))
        ClusteringService.export_embeddings(
            embeddings, store.path("mine", "embeddings.csv"), labels=prepared.train.labels
        )
        if embeddings.shape[0] >= 2 and embeddings.shape[1] >= 2:
            projection = ClusteringService.pca_project_2d(embeddings)
            frame = pd.DataFrame(projection, columns=["pc1", "pc2"])
            frame.insert(0, "label", prepared.train.labels)
            frame.to_csv(
                store.path("mine", "projection_2d.csv"),
                index_label="sample_id",
                float_format="%.17g",
                lineterminator="\n",
            )
        store.write_json("mine", "subset.json", {"indices": kept.tolist()})
        store.commit("mine", n_samples=int(kept.size), n_neighbors=index.k)
        log_event(
            logger,
            "vizinhos minerados",
            kept=int(kept.size),
            total=int(embeddings.shape[0]),
            mode=scan.mining_mode.value,
        )
        return kept

    @staticmethod
    def run_cluster(
        cfg: PipelineConfig, store: ArtifactStore, resume: bool = False
    ) -> Optional[float]:
        """
        Treina a cabeça de clustering (e o extrator após o congelamento).

        Extrator, cabeça e os dois Adam vão para `model.ckpt` ao fim de cada época.

        Returns:
            Optional[float]: Perda SCAN final (sem rótulos).
        """
        store.require("mine")
        prepared = PipelineService.prepare_datasets(cfg, store)
        extractor = PipelineService.load_pretrained_extractor(cfg, store)
        kept = np.asarray(store.read_json("mine", "subset.json")["indices"], dtype=np.int64)
        neighbors = ClusteringService.load_neighbors(store.path("mine", "neighbors.csv"))

        head = build_cluster_head(cfg.model, cfg.scan.seed)
        state = TrainingState(
            modules={"extractor": extractor, "head": head},
            optimizers=ClusteringService.build_optimizers(extractor, head, cfg.scan),
        )
        meta = PipelineService._resume_state(store, "cluster", CKPT_MODEL, state) if resume else {}
        final_loss = meta.get("final_loss")
        store.begin("cluster")

        def checkpoint(stats: ScanEpochStats) -> None:
            nonlocal final_loss
            final_loss = stats.loss
            state.history.append(stats.model_dump(mode="json"))
            PipelineService._save_state(
                cfg, store, "cluster", CKPT_MODEL, state, stats.epoch + 1, final_loss=final_loss
            )
            store.write_json("cluster", "history.json", state.history)

        ClusteringService.train_scan(
            extractor,
            head,
            prepared.train.values[kept],
            neighbors,
            cfg.scan,
            on_epoch=checkpoint,
            optimizers=state.optimizers,
            start_epoch=int(meta.get("epochs_done", 0)),
        )
        PipelineService._save_state(
            cfg, store, "cluster", CKPT_MODEL, state, cfg.scan.epochs, final_loss=final_loss
        )
        store.write_json("cluster", "history.json", state.history)
        store.commit("cluster", final_loss=final_loss)
        log_event(logger, "clustering concluído", final_loss=final_loss)
        return final_loss

    @staticmethod
    def run_match(cfg: PipelineConfig, store: ArtifactStore) -> LabelMap:
        """Mapeia cada cluster a um estado usando todas as janelas de treino."""
        prepared = PipelineService.prepare_datasets(cfg, store)
        extractor, head = PipelineService.load_clustering_model(cfg, store)
        store.begin("match")
        assignments = ClusteringService.assign_clusters(extractor, head, prepared.train.values)
        label_map = LabelMatchingService.match_labels(
            assignments, prepared.train.labels, n_clusters=cfg.model.n_clusters
        )
        LabelMatchingService.save_label_map(label_map, store.path("match", "label_map.csv"))
        store.commit("match", unmatched=label_map.unmatched)
        log_event(
            logger,
            "mapeamento cluster → estado",
            mapping={str(k): v for k, v in sorted(label_map.mapping.items())},
        )
        return label_map

    @staticmethod
    def run_finetune(
        cfg: PipelineConfig, store: ArtifactStore, resume: bool = False
    ) -> Classifier:
        """Ajuste fino do extrator pré-treinado com poucas execuções rotuladas por estado."""
        store.require("pretrain")
        prepared = PipelineService.prepare_datasets(cfg, store)
        extractor = PipelineService.load_pretrained_extractor(cfg, store)
        labeled = FinetuneService.select_labeled_runs(
            prepared.train_runs, cfg.finetune.labeled_runs_per_state, cfg.finetune.seed
        )
        windows = DataService.make_windows(labeled, cfg.data.window_size, cfg.data.step)
        classifier, optimizer = FinetuneService.build_classifier(
            extractor, prepared.n_states, cfg.finetune
        )
        state = TrainingState(
            modules={"extractor": classifier.extractor, "head": classifier.head},
            optimizers={"finetune": optimizer},
        )
        meta = PipelineService._resume_state(store, "finetune", CKPT_MODEL, state) if resume else {}
        store.begin("finetune")

        def checkpoint(stats: FinetuneEpochStats) -> None:
            state.history.append(stats.model_dump(mode="json"))
            PipelineService._save_state(
                cfg,
                store,
                "finetune",
                CKPT_MODEL,
                state,
                stats.epoch + 1,
                n_states=prepared.n_states,
            )
            store.write_json("finetune", "history.json", state.history)

        classifier = FinetuneService.finetune(
            extractor,
            windows,
            prepared.n_states,
            cfg.finetune,
            on_epoch=checkpoint,
            classifier=classifier,
            optimizer=optimizer,
            start_epoch=int(meta.get("epochs_done", 0)),
        )
        PipelineService._save_state(
            cfg,
            store,
            "finetune",
            CKPT_MODEL,
            state,
            cfg.finetune.epochs,
            n_states=prepared.n_states,
        )
        store.write_json("finetune", "history.json", state.history)
        store.write_json("finetune", "labeled_runs.json", [run.run_id for run in labeled])
        store.commit("finetune", n_states=prepared.n_states)
        return classifier

    @staticmethod
    def _report(
        cfg: PipelineConfig,
        store: ArtifactStore,
        test: WindowDataset,
        predicted: np.ndarray,
        clusters: np.ndarray,
        variant: str,
        label_map: Optional[LabelMap] = None,
    ) -> FddReport:
        fdd = MetricsService.fdd_metrics(
            test.labels,
            predicted,
            test.run_ids,
            test.end_indices,
            step_size=cfg.step_size,
            sampling_period_min=cfg.data.sampling_period_min,
        )
        clustering = MetricsService.clustering_metrics(test.labels, clusters)
        report = ReportService.build_report(fdd, clustering, variant, store.fingerprint)
        if label_map is not None and label_map.unmatched:
            n_unmatched = int(np.isin(clusters, label_map.unmatched).sum())
            if n_unmatched:
                logger.warning(
                    f"[{variant}] {n_unmatched} amostras de teste em clusters sem estado "
                    f"{label_map.unmatched}: previstas como normais"
                )
            report = report.model_copy(update={"n_unmatched": n_unmatched})
        return report

    @staticmethod
    def _log_latency(
        extractor: FeatureExtractor, head: ClusterHead, test: WindowDataset, samples: int
    ) -> None:
        count = min(samples, len(test))
        if count == 0:
            return
        timings = []
        for position in range(count):
            started = time.perf_counter()
            ClusteringService.assign_clusters(extractor, head, test.values[position : position + 1])
            timings.append(time.perf_counter() - started)
        log_event(
            logger,
            "latência de inferência por amostra",
            median_s=round(float(np.median(timings)), 6),
            samples=count,
        )

    @staticmethod
    def run_evaluate(
        cfg: PipelineConfig, store: ArtifactStore, baseline: Optional[str] = None
    ) -> dict[str, FddReport]:
        """
        Avalia no teste o pipeline não supervisionado, o ajustado (se existir) e o baseline.

        Returns:
            dict[str, FddReport]: Relatório por variante.
        """
        store.require("match")
        if baseline is not None and baseline not in BASELINES:
            raise ValidationError(
                f"baseline desconhecido: {baseline}", details={"known": list(BASELINES)}
            )
        prepared = PipelineService.prepare_datasets(cfg, store)
        extractor, head = PipelineService.load_clustering_model(cfg, store)
        label_map = LabelMatchingService.load_label_map(store.path("match", "label_map.csv"))
        if len(label_map.mapping) != head.n_outputs:
            raise ValidationError(
                f"mapeamento com {len(label_map.mapping)} clusters, cabeça com {head.n_outputs}",
                details={"label_map": len(label_map.mapping), "head": head.n_outputs},
            )
        test = prepared.test
        if len(test) == 0:
            raise ValidationError("conjunto de teste sem janelas")
        output = store.begin("evaluate")

        fallback = NORMAL_STATE if cfg.eval.unmatched == UnmatchedPolicy.NORMAL else None
        reports: dict[str, FddReport] = {}
        clusters = ClusteringService.assign_clusters(extractor, head, test.values)
        predicted = LabelMatchingService.apply_label_map(clusters, label_map, fallback)
        reports["sensorscan"] = PipelineService._report(
            cfg, store, test, predicted, clusters, "sensorscan", label_map
        )
        PipelineService._log_latency(extractor, head, test, cfg.eval.latency_samples)

        if store.exists("finetune"):
            classifier = PipelineService.load_classifier(cfg, store)
            supervised = FinetuneService.predict_supervised(classifier, test.values)
            reports["finetuned"] = PipelineService._report(
                cfg, store, test, supervised, supervised, "finetuned"
            )

        if baseline == "pca-kmeans":
            result = BaselineService.baseline_pca_kmeans(
                prepared.train.values,
                test.values,
                n_clusters=cfg.model.n_clusters,
                dims=cfg.eval.baseline_dims,
                seed=cfg.seed,
                restarts=cfg.eval.baseline_restarts,
            )
            baseline_map = LabelMatchingService.match_labels(
                result.train_clusters, prepared.train.labels, n_clusters=cfg.model.n_clusters
            )
            reports[baseline] = PipelineService._report(
                cfg,
                store,
                test,
                LabelMatchingService.apply_label_map(result.test_clusters, baseline_map, fallback),
                result.test_clusters,
                baseline,
                baseline_map,
            )

        for name, report in reports.items():
            ReportService.save_report(report, output, name)
            log_event(
                logger,
                f"relatório '{name}'",
                detection_tpr=report.detection_tpr,
                detection_fpr=report.detection_fpr,
                add_samples=report.add_samples,
            )
        store.commit("evaluate", variants=sorted(reports))
        return reports

    @staticmethod
    def run_all(
        cfg: PipelineConfig,
        store: ArtifactStore,
        baseline: Optional[str] = None,
        finetune: bool = False,
        jobs: int = 1,
        resume: bool = False,
    ) -> dict[str, FddReport]:
        """Executa todas as etapas em ordem e retorna os relatórios de avaliação."""
        PipelineService.run_data(cfg, store)
        PipelineService.run_pretrain(cfg, store, resume=resume)
        PipelineService.run_mine(cfg, store, jobs=jobs)
        PipelineService.run_cluster(cfg, store, resume=resume)
        PipelineService.run_match(cfg, store)
        if finetune:
            PipelineService.run_finetune(cfg, store, resume=resume)
        return PipelineService.run_evaluate(cfg, store, baseline=baseline)
