"""Service layer para aumentos de séries temporais e máscaras geométricas."""

import numpy as np

from sensorscan.schemas.augment import AugmentConfig, MaskConfig
from sensorscan.utils.errors import ShapeError, ValidationError


class AugmentationService:
    """Service para jitter, escala, permutação e geração de máscaras."""

    @staticmethod
    def jitter(x: np.ndarray, std: float, rng: np.random.Generator) -> np.ndarray:
        """Soma ruído gaussiano i.i.d. de média zero."""
        if std < 0:
            raise ValidationError("std do jitter deve ser ≥ 0")
        return x + rng.normal(0.0, std, size=x.shape)

    @staticmethod
    def scale(x: np.ndarray, mean: float, std: float, rng: np.random.Generator) -> np.ndarray:
        """Multiplica cada canal por um fator N(mean, std) constante no tempo."""
        if std < 0:
            raise ValidationError("std da escala deve ser ≥ 0")
        factors = rng.normal(mean, std, size=x.shape[-1])
        return x * factors

    @staticmethod
    def permute(x: np.ndarray, n_chunks: int, rng: np.random.Generator) -> np.ndarray:
        """
        Corta a janela em n_chunks blocos contíguos de comprimento aleatório e os embaralha.

        Args:
            x: Janela L×D.
            n_chunks: Número de blocos (1 ≤ n_chunks ≤ L).
            rng: Gerador aleatório.

        Returns:
            np.ndarray: Janela com as mesmas linhas em outra ordem de blocos.
        """
        length = x.shape[0]
        if not 1 <= n_chunks <= length:
            raise ValidationError(f"n_chunks={n_chunks} fora de [1, {length}]")
        if n_chunks == 1:
            return x.copy()
        cuts = np.sort(rng.choice(np.arange(1, length), size=n_chunks - 1, replace=False))
        chunks = np.split(x, cuts, axis=0)
        order = rng.permutation(n_chunks)
        return np.concatenate([chunks[i] for i in order], axis=0)

    @staticmethod
    def weak_augment(x: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
        """α: escala (média fraca) seguida de jitter."""
        scaled = AugmentationService.scale(x, cfg.scale_mean_weak, cfg.scale_std, rng)
        return AugmentationService.jitter(scaled, cfg.jitter_std, rng)

    @staticmethod
    def strong_augment(x: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
        """β: permutação seguida de escala (média forte)."""
        permuted = AugmentationService.permute(x, cfg.n_permute_chunks, rng)
        return AugmentationService.scale(permuted, cfg.scale_mean_strong, cfg.scale_std, rng)

    @staticmethod
    def gen_mask(
        length: int,
        n_channels: int,
        cfg: MaskConfig,
        rng: np.random.Generator,
        require_masked: bool = True,
    ) -> np.ndarray:
        """
        Máscara binária L×D (0 = mascarado) com trechos de comprimento geométrico.

        Em cada coluna os trechos alternam mascarado/não mascarado, com médias
        l_m e l_u e suporte {1, 2, ...}; o primeiro trecho é mascarado com
        probabilidade r. Colunas são independentes.

        Args:
            length: L.
            n_channels: D (número de colunas).
            cfg: Parâmetros r e l_m.
            rng: Gerador aleatório.
            require_masked: Regenerar máscaras sem nenhuma entrada mascarada.

        Returns:
            np.ndarray: Matriz {0, 1} de forma [L, D].
        """
        while True:
            mask = AugmentationService._draw_mask(length, n_channels, cfg, rng)
            if not require_masked or (mask == 0).any():
                return mask

    @staticmethod
    def _draw_mask(
        length: int, n_channels: int, cfg: MaskConfig, rng: np.random.Generator
    ) -> np.ndarray:
        # L//2+1 pares de trechos (cada um ≥ 1) sempre cobrem L timestamps
        pairs = length // 2 + 1
        masked = rng.geometric(1.0 / cfg.l_m, size=(n_channels, pairs))
        unmasked = rng.geometric(1.0 / cfg.l_u, size=(n_channels, pairs))
        first_masked = rng.random(n_channels) < cfg.r

        lengths = np.empty((n_channels, 2 * pairs), dtype=np.int64)
        lengths[:, 0::2] = np.where(first_masked[:, None], masked, unmasked)
        lengths[:, 1::2] = np.where(first_masked[:, None], unmasked, masked)
        ends = np.minimum(np.cumsum(lengths, axis=1), length)

        offsets = np.arange(n_channels)[:, None] * length
        flat_ends = (ends + offsets).ravel()
        queries = (np.arange(length)[None, :] + offsets).ravel()
        segment = np.searchsorted(flat_ends, queries, side="right").reshape(n_channels, length)
        segment -= np.arange(n_channels)[:, None] * (2 * pairs)

        is_masked = (segment % 2 == 0) == first_masked[:, None]
        return (~is_masked).astype(np.float64).T

    @staticmethod
    def apply_mask(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """X̂ = X ⊙ M."""
        if x.shape != mask.shape:
            raise ShapeError(f"máscara {mask.shape} incompatível com amostra {x.shape}")
        return x * mask
