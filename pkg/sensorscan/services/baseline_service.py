"""Service layer para o baseline PCA + k-means."""

from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans
from sklearn.decomposition import PCA
from sklearn.preprocessing import StandardScaler

from sensorscan.utils.errors import ValidationError
from sensorscan.utils.logging import get_logger

logger = get_logger("baseline")


@dataclass
class BaselineResult:
    """Atribuições de cluster do baseline no treino e no teste."""

    train_clusters: np.ndarray
    test_clusters: np.ndarray
    inertia: float


class BaselineService:
    """Service para o baseline de redução de dimensionalidade + k-means."""

    @staticmethod
    def baseline_pca_kmeans(
        train_windows: np.ndarray,
        test_windows: np.ndarray,
        n_clusters: int,
        dims: int = 25,
        seed: int = 0,
        restarts: int = 10,
    ) -> BaselineResult:
        """
        Padroniza janelas achatadas (L·D), projeta por PCA e agrupa por k-means.

        PCA e k-means são ajustados no treino; o teste vai para o centróide mais próximo.

        Args:
            train_windows: Janelas de treino [N, L, D].
            test_windows: Janelas de teste [M, L, D].
            n_clusters: k.
            dims: Componentes principais mantidas.
            seed: Seed de PCA e k-means.
            restarts: Reinícios do k-means (melhor inércia).

        Returns:
            BaselineResult: Clusters de treino e de teste.

        Raises:
            ValidationError: Se dims > min(N, L·D).
        """
        n = train_windows.shape[0]
        train_flat = train_windows.reshape(n, -1)
        test_flat = test_windows.reshape(test_windows.shape[0], -1)
        limit = min(n, train_flat.shape[1])
        if dims > limit:
            raise ValidationError(
                f"dims={dims} maior que min(N, L·D)={limit}",
                details={"dims": dims, "n": n, "features": train_flat.shape[1]},
            )

        scaler = StandardScaler().fit(train_flat)
        pca = PCA(n_components=dims, svd_solver="full", random_state=seed)
        train_proj = pca.fit_transform(scaler.transform(train_flat))
        kmeans = KMeans(
            n_clusters=n_clusters,
            init="k-means++",
            n_init=restarts,
            max_iter=300,
            tol=1e-6,
            random_state=seed,
        ).fit(train_proj)

        test_clusters = (
            kmeans.predict(pca.transform(scaler.transform(test_flat)))
            if test_flat.shape[0]
            else np.zeros(0, dtype=np.int64)
        )
        logger.info(
            f"baseline PCA({dims}) + k-means(k={n_clusters}): inércia {kmeans.inertia_:.4f}, "
            f"variância explicada {pca.explained_variance_ratio_.sum():.3f}"
        )
        return BaselineResult(
            train_clusters=kmeans.labels_.astype(np.int64),
            test_clusters=np.asarray(test_clusters, dtype=np.int64),
            inertia=float(kmeans.inertia_),
        )
