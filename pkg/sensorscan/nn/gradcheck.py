"""Verificação de gradientes por diferenças finitas centrais."""

from typing import Callable, Iterable

import numpy as np

from sensorscan.nn.parameter import Parameter
from sensorscan.utils.errors import ContractError

_STENCILS = {
    2: ((1.0, 1.0 / 2.0), (-1.0, -1.0 / 2.0)),
    4: ((2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)),
}


def _evaluate(f: Callable[[], float], params: list[Parameter]) -> float:
    for parameter in params:
        parameter.zero_grad()
    value = float(f())
    if not np.isfinite(value):
        raise ContractError("função não finita durante a verificação de gradiente")
    return value


def grad_check(
    f: Callable[[], float],
    params: Iterable[Parameter],
    h: float = 1e-5,
    order: int = 2,
) -> float:
    """
    Compara o gradiente analítico com diferenças finitas centrais.

    Args:
        f: Calcula a perda escalar e preenche os gradientes (forward + backward).
        params: Parâmetros verificados coordenada a coordenada.
        h: Passo da diferença finita.
        order: Ordem do estêncil central (2 ou 4).

    Returns:
        float: Máximo de |a − n| / max(|a|, |n|, 1e-8) sobre todas as coordenadas.
    """
    if h <= 0:
        raise ValueError("h deve ser positivo")
    if order not in _STENCILS:
        raise ValueError(f"ordem {order} não suportada (use 2 ou 4)")
    params = list(params)

    _evaluate(f, params)
    analytic = [parameter.grad.copy() for parameter in params]

    worst = 0.0
    for parameter, expected in zip(params, analytic):
        flat = parameter.value.reshape(-1)
        expected_flat = expected.reshape(-1)
        for index in range(flat.size):
            original = flat[index]
            numeric = 0.0
            for offset, weight in _STENCILS[order]:
                flat[index] = original + offset * h
                numeric += weight * _evaluate(f, params)
            flat[index] = original
            numeric /= h
            a = expected_flat[index]
            error = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, error)

    for parameter in params:
        parameter.zero_grad()
    return worst
