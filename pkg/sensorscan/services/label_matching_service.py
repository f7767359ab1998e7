"""Service layer para mapear clusters a estados do processo."""

import json
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from sensorscan.models.feature_extractor import FeatureExtractor
from sensorscan.models.heads import ClusterHead
from sensorscan.schemas.data import NORMAL_STATE
from sensorscan.schemas.report import LabelMap
from sensorscan.services.clustering_service import ClusteringService
from sensorscan.utils.errors import DataParseError, ShapeError, UnmatchedClusterError
from sensorscan.utils.logging import get_logger

logger = get_logger("match")


class LabelMatchingService:
    """Service para ocorrência máxima ponderada e predição não supervisionada."""

    @staticmethod
    def match_cluster(counts: dict[int, int]) -> Optional[int]:
        """
        Estado de um cluster por ocorrência máxima ponderada.

        O estado normal pesa Q_l + 1 (Q_l = estados presentes no cluster), falhas
        pesam 1. Empates vão para o normal e depois para o menor id.
        """
        present = {state: count for state, count in counts.items() if count > 0}
        if not present:
            return None
        n_states = len(present)
        best_state, best_score = None, -1
        for state in sorted(present):
            weight = n_states + 1 if state == NORMAL_STATE else 1
            score = weight * present[state]
            if score > best_score:
                best_state, best_score = state, score
        return best_state

    @staticmethod
    def match_labels(
        assignments: np.ndarray, labels: np.ndarray, n_clusters: Optional[int] = None
    ) -> LabelMap:
        """
        Constrói o LabelMap a partir das atribuições de cluster do conjunto de treino.

        Args:
            assignments: Índice de cluster de cada amostra de treino.
            labels: Estado verdadeiro de cada amostra de treino.
            n_clusters: M̃ (clusters vazios ficam sem estado).

        Returns:
            LabelMap: Estado por cluster e contagens de contingência.
        """
        assignments = np.asarray(assignments, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if assignments.shape != labels.shape:
            raise ShapeError("atribuições e rótulos devem estar alinhados")
        total = n_clusters if n_clusters is not None else int(assignments.max(initial=-1)) + 1
        mapping: dict[int, Optional[int]] = {}
        contingency: dict[int, dict[int, int]] = {}
        for cluster in range(total):
            states, counts = np.unique(labels[assignments == cluster], return_counts=True)
            table = {int(s): int(c) for s, c in zip(states, counts)}
            contingency[cluster] = table
            mapping[cluster] = LabelMatchingService.match_cluster(table)

        label_map = LabelMap(mapping=mapping, contingency=contingency)
        if label_map.unmatched:
            logger.warning(f"clusters sem amostras de treino: {label_map.unmatched}")
        return label_map

    @staticmethod
    def apply_label_map(
        clusters: np.ndarray, label_map: LabelMap, fallback: Optional[int] = None
    ) -> np.ndarray:
        """LM(l) por cluster; cluster sem estado vira `fallback` ou gera UnmatchedClusterError."""
        states = np.empty(len(clusters), dtype=np.int64)
        for position, cluster in enumerate(np.asarray(clusters, dtype=np.int64)):
            state = label_map.mapping.get(int(cluster))
            if state is None:
                state = fallback
            if state is None:
                raise UnmatchedClusterError(int(cluster), details={"sample": position})
            states[position] = state
        return states

    @staticmethod
    def predict_unsupervised(
        inputs: np.ndarray,
        extractor: Optional[FeatureExtractor],
        head: ClusterHead,
        label_map: LabelMap,
    ) -> np.ndarray:
        """LM(argmax 𝒞(𝓕(x))) para cada janela."""
        clusters = ClusteringService.assign_clusters(extractor, head, inputs)
        return LabelMatchingService.apply_label_map(clusters, label_map)

    @staticmethod
    def save_label_map(label_map: LabelMap, path: str | Path) -> Path:
        """CSV `cluster,matched_state,contingency_json`."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = [
            {
                "cluster": cluster,
                "matched_state": pd.NA if state is None else state,
                "contingency_json": json.dumps(
                    {str(k): v for k, v in sorted(label_map.contingency.get(cluster, {}).items())},
                    sort_keys=True,
                ),
            }
            for cluster, state in sorted(label_map.mapping.items())
        ]
        frame = pd.DataFrame(rows, columns=["cluster", "matched_state", "contingency_json"])
        frame["matched_state"] = frame["matched_state"].astype("Int64")
        frame.to_csv(path, index=False, lineterminator="\n")
        return path

    @staticmethod
    def load_label_map(path: str | Path) -> LabelMap:
        frame = pd.read_csv(path, dtype={"contingency_json": str})
        mapping: dict[int, Optional[int]] = {}
        contingency: dict[int, dict[int, int]] = {}
        for position, row in enumerate(frame.itertuples(index=False)):
            try:
                table = json.loads(row.contingency_json)
            except (TypeError, json.JSONDecodeError) as exc:
                raise DataParseError(
                    f"contingency_json inválido: {exc}", line=position + 2
                ) from exc
            cluster = int(row.cluster)
            mapping[cluster] = None if pd.isna(row.matched_state) else int(row.matched_state)
            contingency[cluster] = {int(k): int(v) for k, v in table.items()}
        return LabelMap(mapping=mapping, contingency=contingency)
