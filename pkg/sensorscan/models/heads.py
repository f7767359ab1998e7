"""Cabeças da rede: projeção, reconstrução e clustering/classificação."""

import numpy as np

from sensorscan.nn import BatchNorm1d, Dense, Module, ReLU, Softmax


class ProjectionHead(Module):
    """ℋ: densa (sem viés) → BatchNorm → ReLU → densa para F."""

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int, rng: np.random.Generator):
        super().__init__()
        # viés antes do BatchNorm é absorvido pela média do lote
        self.hidden = self.register_module("hidden", Dense(in_dim, hidden_dim, rng, use_bias=False))
        self.norm = self.register_module("norm", BatchNorm1d(hidden_dim))
        self.relu = self.register_module("relu", ReLU())
        self.out = self.register_module("out", Dense(hidden_dim, out_dim, rng))

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.out(self.relu(self.norm(self.hidden(x))))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        grad = self.relu.backward(self.out.backward(grad))
        return self.hidden.backward(self.norm.backward(grad))


class ReconstructionHead(Module):
    """ℛ: densa H → D aplicada a cada timestamp (usada só no pré-treino)."""

    def __init__(self, hidden_dim: int, n_channels: int, rng: np.random.Generator):
        super().__init__()
        self.linear = self.register_module("linear", Dense(hidden_dim, n_channels, rng))

    def forward(self, h: np.ndarray) -> np.ndarray:
        return self.linear(h)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return self.linear.backward(grad)


class ClusterHead(Module):
    """
    𝒞: MLP de duas camadas com BatchNorm intermediário e softmax final.

    Também serve de cabeça de classificação no ajuste fino (saída = Q).
    """

    def __init__(self, in_dim: int, hidden_dim: int, n_outputs: int, rng: np.random.Generator):
        super().__init__()
        self.n_outputs = n_outputs
        self.hidden = self.register_module("hidden", Dense(in_dim, hidden_dim, rng, use_bias=False))
        self.norm = self.register_module("norm", BatchNorm1d(hidden_dim))
        self.relu = self.register_module("relu", ReLU())
        self.out = self.register_module("out", Dense(hidden_dim, n_outputs, rng))
        self.softmax = self.register_module("softmax", Softmax())

    def forward(self, z: np.ndarray) -> np.ndarray:
        """Retorna vetores de probabilidade [N, n_outputs]."""
        return self.softmax(self.out(self.relu(self.norm(self.hidden(z)))))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        grad = self.out.backward(self.softmax.backward(grad))
        return self.hidden.backward(self.norm.backward(self.relu.backward(grad)))
