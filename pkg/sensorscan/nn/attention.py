"""Auto-atenção multi-cabeça com produto escalar escalonado."""

import math

import numpy as np

from sensorscan.nn.base_module import Module
from sensorscan.nn.layers import Dense, softmax, softmax_backward
from sensorscan.utils.errors import ShapeError


class MultiHeadSelfAttention(Module):
    """
    Atenção multi-cabeça sobre entradas [N, L, H] (ou [L, H]).

    A projeção de chaves não tem viés: um viés em K soma a mesma constante a
    todos os scores de uma consulta e se cancela no softmax.
    """

    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        """
        Inicializa as projeções de consulta, chave, valor e saída.

        Args:
            dim: Dimensão H das embeddings.
            heads: Número de cabeças (H deve ser divisível).
            rng: Gerador para a inicialização.
        """
        super().__init__()
        if dim % heads != 0:
            raise ShapeError(f"H={dim} não é divisível por heads={heads}")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.query = self.register_module("query", Dense(dim, dim, rng))
        self.key = self.register_module("key", Dense(dim, dim, rng, use_bias=False))
        self.value = self.register_module("value", Dense(dim, dim, rng))
        self.output = self.register_module("output", Dense(dim, dim, rng))
        self.attention_weights: np.ndarray | None = None
        self._cache: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._squeeze = False

    def _split(self, x: np.ndarray) -> np.ndarray:
        n, length, _ = x.shape
        return x.reshape(n, length, self.heads, self.head_dim).transpose(0, 2, 1, 3)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        n, _, length, _ = x.shape
        return x.transpose(0, 2, 1, 3).reshape(n, length, self.dim)

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._squeeze = x.ndim == 2
        if self._squeeze:
            x = x[None]
        if x.ndim != 3 or x.shape[-1] != self.dim:
            raise ShapeError(f"atenção espera [N, L, {self.dim}], recebido {x.shape}")

        q = self._split(self.query(x))
        k = self._split(self.key(x))
        v = self._split(self.value(x))
        scale = 1.0 / math.sqrt(self.head_dim)
        weights = softmax(q @ k.transpose(0, 1, 3, 2) * scale, axis=-1)
        self.attention_weights = weights
        self._cache = (q, k, v)

        out = self.output(self._merge(weights @ v))
        return out[0] if self._squeeze else out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._squeeze:
            grad = grad[None]
        q, k, v = self._cache
        weights = self.attention_weights
        scale = 1.0 / math.sqrt(self.head_dim)

        grad_context = self._split(self.output.backward(grad))
        grad_weights = grad_context @ v.transpose(0, 1, 3, 2)
        grad_v = weights.transpose(0, 1, 3, 2) @ grad_context
        grad_scores = softmax_backward(weights, grad_weights, axis=-1) * scale
        grad_q = grad_scores @ k
        grad_k = grad_scores.transpose(0, 1, 3, 2) @ q

        grad_x = (
            self.query.backward(self._merge(grad_q))
            + self.key.backward(self._merge(grad_k))
            + self.value.backward(self._merge(grad_v))
        )
        return grad_x[0] if self._squeeze else grad_x
