"""Parâmetros treináveis e largura de ponto flutuante do núcleo numérico."""

import numpy as np

from sensorscan.config.settings import settings


def default_dtype() -> np.dtype:
    """Largura única de ponto flutuante usada em todo o núcleo (settings.float_dtype)."""
    return np.dtype(settings.float_dtype)


def as_tensor(value: object) -> np.ndarray:
    """Converte para um array denso contíguo na largura configurada."""
    return np.ascontiguousarray(np.asarray(value, dtype=default_dtype()))


class Parameter:
    """Tensor de valores com gradiente acumulado da mesma forma."""

    def __init__(self, value: object, trainable: bool = True):
        """
        Inicializa o parâmetro.

        Args:
            value: Valores iniciais (convertidos para a largura configurada).
            trainable: Se o otimizador deve atualizar este parâmetro.
        """
        self.value = as_tensor(value)
        self.grad = np.zeros_like(self.value)
        self.trainable = trainable
        self.frozen = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return int(self.value.size)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def __repr__(self) -> str:
        """Representação string do parâmetro."""
        state = "frozen" if self.frozen else ("trainable" if self.trainable else "fixed")
        return f"<Parameter(shape={self.shape}, {state})>"
