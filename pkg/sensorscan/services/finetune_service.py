"""Service layer para o ajuste fino supervisionado com poucas execuções rotuladas."""

import time
from collections import defaultdict
from typing import Callable, Optional

import numpy as np

from sensorscan.models.feature_extractor import Classifier, FeatureExtractor, build_cluster_head
from sensorscan.nn import Adam
from sensorscan.schemas.data import SensorRun, WindowDataset
from sensorscan.schemas.training import FinetuneConfig, FinetuneEpochStats
from sensorscan.services.pretrain_service import LossOutput
from sensorscan.utils.errors import ValidationError
from sensorscan.utils.logging import get_logger, log_event

logger = get_logger("finetune")

_PROB_FLOOR = 1e-12


class FinetuneService:
    """Service para seleção de execuções rotuladas, treino e predição supervisionada."""

    @staticmethod
    def select_labeled_runs(
        runs: list[SensorRun], per_state: int, seed: int
    ) -> list[SensorRun]:
        """Sorteia `per_state` execuções de cada estado presente."""
        groups: dict[int, list[int]] = defaultdict(list)
        for index, run in enumerate(runs):
            groups[run.fault_label].append(index)
        chosen: list[int] = []
        for state in sorted(groups):
            indices = groups[state]
            if len(indices) < per_state:
                raise ValidationError(
                    f"estado {state} tem {len(indices)} execuções, pedido {per_state} rotuladas",
                    details={"state": state},
                )
            rng = np.random.default_rng([seed, state])
            chosen.extend(indices[i] for i in rng.choice(len(indices), per_state, replace=False))
        return [runs[i] for i in sorted(chosen)]

    @staticmethod
    def smoothed_targets(labels: np.ndarray, n_states: int, epsilon: float) -> np.ndarray:
        """(1 − ε) · one-hot + ε / Q."""
        targets = np.full((len(labels), n_states), epsilon / n_states)
        targets[np.arange(len(labels)), labels] += 1.0 - epsilon
        return targets

    @staticmethod
    def loss_cross_entropy(
        probs: np.ndarray, labels: np.ndarray, epsilon: float = 0.0
    ) -> LossOutput:
        """Entropia cruzada com suavização de rótulos; gradiente em relação às probabilidades."""
        targets = FinetuneService.smoothed_targets(labels, probs.shape[1], epsilon)
        floored = np.maximum(probs, _PROB_FLOOR)
        batch = probs.shape[0]
        value = float(-(targets * np.log(floored)).sum(axis=1).mean())
        grad = -targets / (batch * floored)
        return LossOutput(value=value, grad=grad)

    @staticmethod
    def build_classifier(
        extractor: FeatureExtractor, n_states: int, cfg: FinetuneConfig
    ) -> tuple[Classifier, Adam]:
        """Anexa uma cabeça nova (saída Q) ao extrator descongelado e cria o Adam."""
        head = build_cluster_head(extractor.cfg, cfg.seed, n_outputs=n_states)
        classifier = Classifier(extractor, head)
        extractor.freeze(False)
        optimizer = Adam(classifier.named_parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
        return classifier, optimizer

    @staticmethod
    def finetune(
        extractor: FeatureExtractor,
        windows: WindowDataset,
        n_states: int,
        cfg: FinetuneConfig,
        on_epoch: Optional[Callable[[FinetuneEpochStats], None]] = None,
        classifier: Optional[Classifier] = None,
        optimizer: Optional[Adam] = None,
        start_epoch: int = 0,
    ) -> Classifier:
        """
        Treina extrator + cabeça de classificação com entropia cruzada suavizada.

        Args:
            extractor: Extrator pré-treinado (atualizado no lugar).
            windows: Janelas rotuladas das execuções selecionadas.
            n_states: Q.
            cfg: Configuração do ajuste fino.
            on_epoch: Callback por época.
            classifier: Classificador de `build_classifier` (p.ex. restaurado); criado se None.
            optimizer: Adam do classificador; criado junto com ele se None.
            start_epoch: Primeira época a executar.

        Returns:
            Classifier: Extrator + cabeça de classificação em modo de avaliação.
        """
        present = set(np.unique(windows.labels).tolist())
        missing = [state for state in range(n_states) if state not in present]
        if missing:
            raise ValidationError(
                f"estados sem janelas rotuladas: {missing}", details={"missing": missing}
            )
        if classifier is None or optimizer is None:
            classifier, optimizer = FinetuneService.build_classifier(extractor, n_states, cfg)

        n = len(windows)
        for epoch in range(start_epoch, cfg.epochs):
            started = time.perf_counter()
            classifier.set_rng(np.random.default_rng([cfg.seed, 5, epoch]))
            classifier.train()
            order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
            loss_sum, correct, seen, n_batches = 0.0, 0, 0, 0
            for start in range(0, n, cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                if batch.size < 2:
                    continue
                labels = windows.labels[batch]
                probs = classifier(windows.values[batch])
                loss = FinetuneService.loss_cross_entropy(probs, labels, cfg.label_smoothing)
                classifier.backward(loss.grad)
                optimizer.step()
                loss_sum += loss.value
                correct += int((np.argmax(probs, axis=1) == labels).sum())
                seen += batch.size
                n_batches += 1

            stats = FinetuneEpochStats(
                epoch=epoch,
                loss=loss_sum / max(n_batches, 1),
                accuracy=correct / max(seen, 1),
                wall_time=time.perf_counter() - started,
            )
            log_event(
                logger,
                f"época {epoch + 1}/{cfg.epochs}",
                epoch=epoch,
                loss=round(stats.loss, 6),
                accuracy=round(stats.accuracy, 4),
                wall_time=round(stats.wall_time, 3),
            )
            if on_epoch is not None:
                on_epoch(stats)

        classifier.eval()
        return classifier

    @staticmethod
    def predict_supervised(classifier: Classifier, inputs: np.ndarray) -> np.ndarray:
        """Argmax das probabilidades de classe."""
        return classifier.predict(inputs)
