"""Otimizador Adam com weight decay L2."""

from typing import Iterable

import numpy as np

from sensorscan.nn.parameter import Parameter, as_tensor
from sensorscan.utils.errors import ShapeError


class Adam:
    """
    Adam com correção de viés; o weight decay entra como termo L2 no gradiente.

    Parâmetros congelados ou não treináveis não são atualizados. Todos os
    gradientes são zerados após cada passo.
    """

    def __init__(
        self,
        named_parameters: Iterable[tuple[str, Parameter]],
        lr: float,
        weight_decay: float = 0.0,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        """
        Inicializa o otimizador.

        Args:
            named_parameters: Pares (nome, parâmetro), p.ex. module.named_parameters().
            lr: Taxa de aprendizado.
            weight_decay: Coeficiente do termo L2.
            betas: Decaimentos dos momentos (β1, β2).
            eps: Termo de estabilidade do denominador.
        """
        self.params = dict(named_parameters)
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.m = {name: np.zeros_like(p.value) for name, p in self.params.items()}
        self.v = {name: np.zeros_like(p.value) for name, p in self.params.items()}

    def step(self) -> None:
        self.step_count += 1
        t = self.step_count
        correction1 = 1.0 - self.beta1**t
        correction2 = 1.0 - self.beta2**t
        for name, parameter in self.params.items():
            if parameter.trainable and not parameter.frozen:
                grad = parameter.grad
                if self.weight_decay:
                    grad = grad + self.weight_decay * parameter.value
                m = self.m[name]
                v = self.v[name]
                m *= self.beta1
                m += (1.0 - self.beta1) * grad
                v *= self.beta2
                v += (1.0 - self.beta2) * grad**2
                update = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
                parameter.value -= self.lr * update
            parameter.zero_grad()

    def zero_grad(self) -> None:
        for parameter in self.params.values():
            parameter.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        state: dict[str, np.ndarray] = {"step_count": np.asarray(self.step_count)}
        for name in self.params:
            state[f"m/{name}"] = self.m[name]
            state[f"v/{name}"] = self.v[name]
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        self.step_count = int(state["step_count"])
        for name, parameter in self.params.items():
            for key, target in (("m", self.m), ("v", self.v)):
                array = state[f"{key}/{name}"]
                if array.shape != parameter.shape:
                    raise ShapeError(
                        f"estado do otimizador '{key}/{name}' com forma {array.shape}, "
                        f"esperado {parameter.shape}"
                    )
                target[name] = as_tensor(array).copy()

    def __repr__(self) -> str:
        return f"<Adam(lr={self.lr}, weight_decay={self.weight_decay}, steps={self.step_count})>"
