"""Módulo base para todas as camadas da rede."""

from abc import ABC, abstractmethod
from typing import Iterator

import numpy as np

from sensorscan.nn.parameter import Parameter, as_tensor


class Module(ABC):
    """
    Classe base para camadas com forward/backward explícitos.

    Cada forward guarda em cache o necessário para o backward seguinte; o
    backward acumula gradientes nos parâmetros e retorna o gradiente da entrada.
    """

    def __init__(self) -> None:
        """Inicializa registros de parâmetros, submódulos e buffers."""
        self._parameters: dict[str, Parameter] = {}
        self._modules: dict[str, "Module"] = {}
        self._buffers: dict[str, np.ndarray] = {}
        self.training = True
        self.rng = np.random.default_rng(0)

    @abstractmethod
    def forward(self, x: np.ndarray) -> np.ndarray:
        """
        Executa o passo direto.

        Args:
            x: Entrada da camada.

        Returns:
            np.ndarray: Saída da camada.
        """
        pass

    @abstractmethod
    def backward(self, grad: np.ndarray) -> np.ndarray:
        """
        Propaga o gradiente da saída para a entrada.

        Args:
            grad: Gradiente da perda em relação à saída do último forward.

        Returns:
            np.ndarray: Gradiente em relação à entrada.
        """
        pass

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)

    def register_parameter(self, name: str, value: object, trainable: bool = True) -> Parameter:
        parameter = Parameter(value, trainable=trainable)
        self._parameters[name] = parameter
        return parameter

    def register_module(self, name: str, module: "Module") -> "Module":
        self._modules[name] = module
        return module

    def register_buffer(self, name: str, value: object) -> None:
        self._buffers[name] = as_tensor(value)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        """Percorre parâmetros em ordem de registro com nomes pontuados."""
        for name, parameter in self._parameters.items():
            yield f"{prefix}{name}", parameter
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix=f"{prefix}{name}.")

    def parameters(self) -> list[Parameter]:
        return [parameter for _, parameter in self.named_parameters()]

    def named_buffers(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for name, buffer in self._buffers.items():
            yield f"{prefix}{name}", buffer
        for name, module in self._modules.items():
            yield from module.named_buffers(prefix=f"{prefix}{name}.")

    def set_buffer(self, dotted_name: str, value: np.ndarray) -> None:
        """Substitui um buffer identificado pelo nome pontuado."""
        *path, name = dotted_name.split(".")
        module: Module = self
        for part in path:
            module = module._modules[part]
        if name not in module._buffers:
            raise KeyError(dotted_name)
        module._buffers[name] = as_tensor(value)

    def num_parameters(self) -> int:
        return sum(parameter.size for parameter in self.parameters())

    def train(self, mode: bool = True) -> "Module":
        self.training = mode
        for module in self._modules.values():
            module.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def freeze(self, frozen: bool = True) -> "Module":
        """Marca todos os parâmetros como congelados (ignorados pelo otimizador)."""
        for parameter in self.parameters():
            parameter.frozen = frozen
        return self

    def zero_grad(self) -> None:
        for parameter in self.parameters():
            parameter.zero_grad()

    def set_rng(self, rng: np.random.Generator) -> "Module":
        """Compartilha um gerador aleatório (dropout) com todos os submódulos."""
        self.rng = rng
        for module in self._modules.values():
            module.set_rng(rng)
        return self

    def __repr__(self) -> str:
        """Representação string do módulo."""
        children = ", ".join(self._modules) or "-"
        return (
            f"<{self.__class__.__name__}(params={self.num_parameters()}, "
            f"training={self.training}, children={children})>"
        )
