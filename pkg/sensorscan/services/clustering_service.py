"""Service layer para mineração de vizinhos e clustering com a perda SCAN."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd
from sklearn.cluster import KMeans
from sklearn.decomposition import PCA

from sensorscan.models.feature_extractor import FeatureExtractor
from sensorscan.models.heads import ClusterHead
from sensorscan.nn import Adam, as_tensor
from sensorscan.schemas.clustering import NeighborIndex
from sensorscan.schemas.training import MiningMode, ScanConfig, ScanEpochStats
from sensorscan.utils.errors import ShapeError, ValidationError
from sensorscan.utils.logging import get_logger, log_event

logger = get_logger("scan")

_CLAMP = 1e-8


@dataclass
class ScanLossOutput:
    """Perda SCAN, seus termos e gradientes em relação às duas entradas."""

    value: float
    consistency: float
    entropy: float
    grad_anchor: np.ndarray
    grad_neighbor: np.ndarray


@dataclass
class ScanOutcome:
    """Resultado do treino de clustering."""

    history: list[ScanEpochStats] = field(default_factory=list)
    final_loss: Optional[float] = None
    optimizers: dict[str, Adam] = field(default_factory=dict)


def _squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)


class ClusteringService:
    """Service para vizinhos, perda SCAN, treino e exportação de embeddings."""

    @staticmethod
    def _knn_within(embeddings: np.ndarray, ids: np.ndarray, k: int) -> np.ndarray:
        """K vizinhos de cada id dentro do próprio grupo; empates vão para o menor id."""
        ids = np.sort(ids)
        distances = _squared_distances(embeddings[ids], embeddings[ids])
        np.fill_diagonal(distances, np.inf)
        order = np.argsort(distances, axis=1, kind="stable")[:, :k]
        return ids[order]

    @staticmethod
    def mine_neighbors(
        embeddings: np.ndarray,
        n_neighbors: int,
        n_chunks: int = 20,
        mode: MiningMode = MiningMode.CHUNKED,
        seed: int = 0,
        jobs: int = 1,
    ) -> NeighborIndex:
        """
        K vizinhos mais próximos (distância euclidiana) de cada embedding.

        Args:
            embeddings: Matriz N×F.
            n_neighbors: K.
            n_chunks: T; ids embaralhados com `seed` e divididos em T blocos quase iguais.
            mode: `chunked` busca dentro de cada bloco; `naive` no conjunto inteiro.
            seed: Seed do embaralhamento.
            jobs: Threads para processar blocos em paralelo.

        Returns:
            NeighborIndex: Exatamente K vizinhos por amostra, sem a própria amostra.

        Raises:
            ValidationError: Se algum bloco (ou o conjunto) tiver menos de K + 1 amostras.
        """
        n = embeddings.shape[0]
        neighbors = np.empty((n, n_neighbors), dtype=np.int64)
        chunk_ids = np.full(n, -1, dtype=np.int64)

        if mode == MiningMode.NAIVE:
            if n < n_neighbors + 1:
                raise ValidationError(f"N={n} insuficiente para K={n_neighbors}")
            block = max(1, 2**22 // max(1, n * embeddings.shape[1]))
            for start in range(0, n, block):
                rows = np.arange(start, min(n, start + block))
                distances = _squared_distances(embeddings[rows], embeddings)
                distances[np.arange(rows.size), rows] = np.inf
                neighbors[rows] = np.argsort(distances, axis=1, kind="stable")[:, :n_neighbors]
            return NeighborIndex(neighbors=neighbors, chunk_ids=chunk_ids)

        permutation = np.random.default_rng(seed).permutation(n)
        chunks = np.array_split(permutation, n_chunks)
        smallest = min(len(chunk) for chunk in chunks)
        if smallest < n_neighbors + 1:
            raise ValidationError(
                f"bloco com {smallest} amostras é pequeno demais para K={n_neighbors}",
                details={"n": n, "n_chunks": n_chunks, "k": n_neighbors},
            )

        def mine(chunk_index: int) -> None:
            ids = np.sort(chunks[chunk_index])
            neighbors[ids] = ClusteringService._knn_within(embeddings, ids, n_neighbors)
            chunk_ids[ids] = chunk_index

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(mine, range(len(chunks))))
        else:
            for chunk_index in range(len(chunks)):
                mine(chunk_index)
        return NeighborIndex(neighbors=neighbors, chunk_ids=chunk_ids)

    @staticmethod
    def subsample_normal(embeddings: np.ndarray, n_clusters: int, seed: int) -> np.ndarray:
        """
        Reduz o maior grupo do k-means à mediana do tamanho dos demais grupos.

        Returns:
            np.ndarray: Índices mantidos, em ordem crescente.
        """
        n = embeddings.shape[0]
        if n < n_clusters:
            raise ValidationError(f"N={n} menor que o número de clusters {n_clusters}")
        groups = KMeans(n_clusters=n_clusters, n_init=10, random_state=seed).fit_predict(
            embeddings
        )
        sizes = np.bincount(groups, minlength=n_clusters)
        largest = int(np.argmax(sizes))
        others = np.delete(sizes, largest)
        target = int(np.floor(np.median(others) + 0.5)) if others.size else sizes[largest]
        keep = np.ones(n, dtype=bool)
        if sizes[largest] > target:
            members = np.flatnonzero(groups == largest)
            rng = np.random.default_rng([seed, 7])
            dropped = rng.choice(members, size=members.size - target, replace=False)
            keep[dropped] = False
            logger.info(
                f"maior grupo subamostrado de {members.size} para {target} amostras "
                f"({int(keep.sum())}/{n} mantidas)"
            )
        return np.flatnonzero(keep)

    @staticmethod
    def loss_scan(
        p: np.ndarray,
        p_neighbors: np.ndarray,
        lambda_ent: float,
        literal_entropy_sign: bool = False,
    ) -> ScanLossOutput:
        """
        −média log⟨p_i, p_i^NN⟩ − λ_ent · H(média de p) (ou + com o sinal literal).

        Args:
            p: Probabilidades das âncoras [B, M̃].
            p_neighbors: Probabilidades dos vizinhos sorteados [B, M̃].
            lambda_ent: Peso da entropia.
            literal_entropy_sign: Somar a entropia em vez de subtraí-la.
        """
        if p.shape != p_neighbors.shape or p.ndim != 2:
            raise ShapeError("p e p_neighbors devem ter a mesma forma [B, M̃]")
        for probs in (p, p_neighbors):
            if np.any(probs < -1e-12) or not np.allclose(probs.sum(axis=1), 1.0, atol=1e-6):
                raise ValidationError("entradas de loss_scan devem ser vetores de probabilidade")
        batch = p.shape[0]
        dots = (p * p_neighbors).sum(axis=1)
        clamped = np.maximum(dots, _CLAMP)
        consistency = float(-np.log(clamped).mean())
        active = (dots > _CLAMP)[:, None]
        grad_anchor = -(p_neighbors / clamped[:, None]) * active / batch
        grad_neighbor = -(p / clamped[:, None]) * active / batch

        mean_p = p.mean(axis=0)
        log_mean = np.log(np.maximum(mean_p, _CLAMP))
        entropy = float(-(mean_p * log_mean).sum())
        grad_entropy = -(log_mean + (mean_p > _CLAMP))
        sign = 1.0 if literal_entropy_sign else -1.0
        grad_anchor = grad_anchor + sign * lambda_ent * grad_entropy[None, :] / batch

        return ScanLossOutput(
            value=consistency + sign * lambda_ent * entropy,
            consistency=consistency,
            entropy=entropy,
            grad_anchor=grad_anchor,
            grad_neighbor=grad_neighbor,
        )

    @staticmethod
    def build_optimizers(
        extractor: Optional[FeatureExtractor], head: ClusterHead, cfg: ScanConfig
    ) -> dict[str, Adam]:
        """Adam da cabeça (lr_head) e, se houver extrator, do extrator (lr_extractor)."""
        optimizers = {
            "head": Adam(head.named_parameters(), lr=cfg.lr_head, weight_decay=cfg.weight_decay)
        }
        if extractor is not None:
            optimizers["extractor"] = Adam(
                extractor.named_parameters(), lr=cfg.lr_extractor, weight_decay=cfg.weight_decay
            )
        return optimizers

    @staticmethod
    def train_scan(
        extractor: Optional[FeatureExtractor],
        head: ClusterHead,
        inputs: np.ndarray,
        neighbors: NeighborIndex,
        cfg: ScanConfig,
        on_epoch: Optional[Callable[[ScanEpochStats], None]] = None,
        optimizers: Optional[dict[str, Adam]] = None,
        start_epoch: int = 0,
    ) -> ScanOutcome:
        """
        Treina 𝒞 (e 𝓕 após freeze_epochs) minimizando a perda SCAN.

        Args:
            extractor: Extrator pré-treinado, ou None para treinar só sobre embeddings.
            head: Cabeça de clustering.
            inputs: Janelas [N, L, D] (ou embeddings [N, F] quando extractor é None).
            neighbors: Vizinhos minerados sobre as mesmas N amostras.
            cfg: Configuração do clustering.
            on_epoch: Callback por época.
            optimizers: Otimizadores de `build_optimizers` (p.ex. restaurados); criados se None.
            start_epoch: Primeira época a executar.

        Returns:
            ScanOutcome: Histórico das épocas executadas, perda final e otimizadores.
        """
        n = inputs.shape[0]
        if len(neighbors) != n:
            raise ShapeError(f"índice de vizinhos com {len(neighbors)} amostras, entradas {n}")
        optimizers = optimizers or ClusteringService.build_optimizers(extractor, head, cfg)
        head_optimizer = optimizers["head"]
        extractor_optimizer = optimizers.get("extractor")
        cached = extractor.embed(inputs) if extractor is not None else as_tensor(inputs)

        outcome = ScanOutcome(optimizers=optimizers)
        for epoch in range(start_epoch, cfg.epochs):
            started = time.perf_counter()
            frozen = extractor is None or epoch < cfg.freeze_epochs
            head.set_rng(np.random.default_rng([cfg.seed, 3, epoch]))
            if extractor is not None:
                extractor.set_rng(np.random.default_rng([cfg.seed, 4, epoch]))
                extractor.freeze(frozen)
                extractor.train(not frozen)
            head.train()

            rng = np.random.default_rng([cfg.seed, epoch])
            order = rng.permutation(n)
            sums = np.zeros(3)
            n_batches = 0
            for start in range(0, n, cfg.batch_size):
                anchors = order[start : start + cfg.batch_size]
                if anchors.size < 2:
                    continue
                picks = rng.integers(0, neighbors.k, size=anchors.size)
                partners = neighbors.neighbors[anchors, picks]
                ids = np.concatenate([anchors, partners])

                if frozen:
                    probs = head(cached[ids])
                else:
                    probs = head(extractor(inputs[ids]))
                loss = ClusteringService.loss_scan(
                    probs[: anchors.size],
                    probs[anchors.size :],
                    cfg.lambda_ent,
                    cfg.literal_entropy_sign,
                )
                grad_z = head.backward(np.concatenate([loss.grad_anchor, loss.grad_neighbor]))
                if not frozen:
                    extractor.backward(grad_z)
                    extractor_optimizer.step()
                head_optimizer.step()
                sums += (loss.value, loss.consistency, loss.entropy)
                n_batches += 1

            mean_loss, consistency, entropy = sums / max(n_batches, 1)
            stats = ScanEpochStats(
                epoch=epoch,
                loss=float(mean_loss),
                consistency=float(consistency),
                entropy=float(entropy),
                frozen=frozen,
                wall_time=time.perf_counter() - started,
            )
            outcome.history.append(stats)
            outcome.final_loss = stats.loss
            log_event(
                logger,
                f"época {epoch + 1}/{cfg.epochs}",
                epoch=epoch,
                loss=round(stats.loss, 6),
                consistency=round(stats.consistency, 6),
                entropy=round(stats.entropy, 6),
                frozen=frozen,
                wall_time=round(stats.wall_time, 3),
            )
            if on_epoch is not None:
                on_epoch(stats)

        if extractor is not None:
            extractor.freeze(False)
            extractor.eval()
        head.eval()
        return outcome

    @staticmethod
    def assign_clusters(
        extractor: Optional[FeatureExtractor], head: ClusterHead, inputs: np.ndarray
    ) -> np.ndarray:
        """Argmax de 𝒞(𝓕(x)) em modo de avaliação."""
        embeddings = extractor.embed(inputs) if extractor is not None else as_tensor(inputs)
        head.eval()
        if embeddings.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        return np.argmax(head(embeddings), axis=1)

    @staticmethod
    def export_embeddings(
        embeddings: np.ndarray, path: str | Path, labels: Optional[np.ndarray] = None
    ) -> Path:
        """CSV `sample_id,label_if_known,e0..e{F-1}` (rótulo vazio quando desconhecido)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(embeddings, columns=[f"e{i}" for i in range(embeddings.shape[1])])
        known = pd.array(
            labels.tolist() if labels is not None else [None] * len(frame), dtype="Int64"
        )
        frame.insert(0, "label_if_known", known)
        frame.insert(0, "sample_id", np.arange(len(frame)))
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    @staticmethod
    def load_embeddings(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
        """Retorna (embeddings [N, F], rótulos com −1 onde desconhecido)."""
        frame = pd.read_csv(path)
        columns = [c for c in frame.columns if c.startswith("e")]
        labels = frame["label_if_known"].fillna(-1).to_numpy(dtype=np.int64)
        return frame[columns].to_numpy(dtype=np.float64), labels

    @staticmethod
    def pca_project_2d(embeddings: np.ndarray) -> np.ndarray:
        """
        Projeção nas duas componentes principais (variância decrescente).

        O sinal de cada componente segue a convenção do scikit-learn: a carga de maior
        módulo é positiva.
        """
        n = embeddings.shape[0]
        if n < 2:
            raise ValidationError("pca_project_2d exige N ≥ 2")
        if embeddings.shape[1] < 2:
            raise ValidationError("pca_project_2d exige F ≥ 2")
        return PCA(n_components=2, svd_solver="full").fit_transform(embeddings)

    @staticmethod
    def save_neighbors(index: NeighborIndex, path: str | Path) -> Path:
        """CSV `sample_id,neighbor_1..neighbor_K`."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            index.neighbors, columns=[f"neighbor_{i + 1}" for i in range(index.k)]
        )
        frame.insert(0, "sample_id", np.arange(len(index)))
        frame.to_csv(path, index=False, lineterminator="\n")
        return path

    @staticmethod
    def load_neighbors(path: str | Path) -> NeighborIndex:
        frame = pd.read_csv(path)
        columns = [c for c in frame.columns if c.startswith("neighbor_")]
        if not np.array_equal(frame["sample_id"].to_numpy(), np.arange(len(frame))):
            raise ValidationError(f"{path}: sample_id deve ser 0..N-1 em ordem")
        neighbors = frame[columns].to_numpy(dtype=np.int64)
        return NeighborIndex(neighbors=neighbors, chunk_ids=np.full(len(frame), -1, np.int64))
