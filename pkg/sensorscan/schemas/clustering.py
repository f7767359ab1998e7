"""Estruturas da etapa de clustering."""

from dataclasses import dataclass

import numpy as np


@dataclass
class NeighborIndex:
    """K vizinhos mais próximos de cada amostra (ids locais ao conjunto minerado)."""

    neighbors: np.ndarray  # [N, K] int64
    chunk_ids: np.ndarray  # [N] int64; -1 no modo ingênuo

    def __len__(self) -> int:
        return int(self.neighbors.shape[0])

    @property
    def k(self) -> int:
        return int(self.neighbors.shape[1])

    def neighbors_of(self, sample_id: int) -> list[int]:
        return [int(n) for n in self.neighbors[sample_id]]
