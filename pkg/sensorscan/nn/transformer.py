"""Camada de encoder Transformer (post-norm)."""

import numpy as np

from sensorscan.nn.attention import MultiHeadSelfAttention
from sensorscan.nn.base_module import Module
from sensorscan.nn.layers import Dense, Dropout, LayerNorm, ReLU


class TransformerEncoderLayer(Module):
    """
    x → LN(x + Dropout(MHSA(x))) → LN(· + Dropout(FF(·))), FF = densa → ReLU → densa.
    """

    def __init__(
        self,
        dim: int,
        heads: int,
        ff_dim: int,
        dropout: float,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.attention = self.register_module(
            "attention", MultiHeadSelfAttention(dim, heads, rng)
        )
        self.attention_dropout = self.register_module("attention_dropout", Dropout(dropout))
        self.norm1 = self.register_module("norm1", LayerNorm(dim))
        self.ff_in = self.register_module("ff_in", Dense(dim, ff_dim, rng))
        self.ff_relu = self.register_module("ff_relu", ReLU())
        self.ff_out = self.register_module("ff_out", Dense(ff_dim, dim, rng))
        self.ff_dropout = self.register_module("ff_dropout", Dropout(dropout))
        self.norm2 = self.register_module("norm2", LayerNorm(dim))

    def forward(self, x: np.ndarray) -> np.ndarray:
        y = self.norm1(x + self.attention_dropout(self.attention(x)))
        f = self.ff_dropout(self.ff_out(self.ff_relu(self.ff_in(y))))
        return self.norm2(y + f)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        grad_sum2 = self.norm2.backward(grad)
        grad_ff = self.ff_out.backward(self.ff_dropout.backward(grad_sum2))
        grad_y = grad_sum2 + self.ff_in.backward(self.ff_relu.backward(grad_ff))
        grad_sum1 = self.norm1.backward(grad_y)
        return grad_sum1 + self.attention.backward(self.attention_dropout.backward(grad_sum1))
