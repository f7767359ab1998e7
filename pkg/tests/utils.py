"""Funções auxiliares de verificação de gradiente para os testes."""

from typing import Callable, Iterator

import numpy as np

from sensorscan.nn import Module, Parameter, ReLU, grad_check

H = 1e-4
# margem das entradas de ReLU para que o estêncil não cruze o ponto de quebra
KINK_MARGIN = 2e-3


def relu_inputs(module: Module) -> Iterator[np.ndarray]:
    if isinstance(module, ReLU) and module.last_input is not None:
        yield module.last_input
    for child in module._modules.values():
        yield from relu_inputs(child)


def near_kink(module: Module) -> bool:
    return any(np.abs(x).min() < KINK_MARGIN for x in relu_inputs(module))


def weighted_sum_loss(
    module: Module, x: Parameter, weights: np.ndarray
) -> Callable[[], float]:
    """Perda Σ saída·R; preenche gradientes dos parâmetros e da entrada."""

    def f() -> float:
        out = module(x.value)
        x.grad += module.backward(weights)
        return float((out * weights).sum())

    return f


def check_module(module: Module, x: np.ndarray, rng: np.random.Generator) -> float:
    """Maior erro relativo do backward do módulo (parâmetros e entrada)."""
    inputs = Parameter(x)
    weights = rng.normal(size=module(inputs.value).shape)
    return grad_check(
        weighted_sum_loss(module, inputs, weights),
        [*module.parameters(), inputs],
        h=H,
        order=4,
    )
