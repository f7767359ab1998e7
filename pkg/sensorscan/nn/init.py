"""Inicialização de pesos e encoding posicional."""

import math

import numpy as np

from sensorscan.nn.parameter import as_tensor
from sensorscan.utils.errors import ShapeError


def xavier_init(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """
    Inicialização de Xavier (uniforme).

    Args:
        shape: Forma 2-D (fan_in, fan_out).
        rng: Gerador aleatório.

    Returns:
        np.ndarray: Valores em ±sqrt(6 / (fan_in + fan_out)).
    """
    if len(shape) != 2:
        raise ShapeError(f"xavier_init espera forma 2-D, recebido {shape}")
    fan_in, fan_out = shape
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return as_tensor(rng.uniform(-bound, bound, size=shape))


def sinusoidal_positional_encoding(length: int, dim: int) -> np.ndarray:
    """
    Encoding posicional senoidal [L, H].

    PE[t, 2k] = sin(t / 10000^(2k/H)), PE[t, 2k+1] = cos(t / 10000^(2k/H)).
    """
    if dim % 2 != 0:
        raise ShapeError(f"H deve ser par para o encoding posicional, recebido {dim}")
    positions = np.arange(length, dtype=np.float64)[:, None]
    frequencies = np.power(10000.0, -np.arange(0, dim, 2, dtype=np.float64) / dim)
    angles = positions * frequencies[None, :]
    encoding = np.empty((length, dim), dtype=np.float64)
    encoding[:, 0::2] = np.sin(angles)
    encoding[:, 1::2] = np.cos(angles)
    return as_tensor(encoding)
