"""Camadas elementares: densa, ativações, dropout e normalizações."""

import numpy as np

from sensorscan.nn.base_module import Module
from sensorscan.nn.init import xavier_init
from sensorscan.nn.parameter import as_tensor
from sensorscan.utils.errors import ShapeError


class Dense(Module):
    """Camada afim xW + b aplicada ao último eixo."""

    def __init__(
        self, in_features: int, out_features: int, rng: np.random.Generator, use_bias: bool = True
    ):
        """
        Inicializa a camada densa.

        Args:
            in_features: Dimensão de entrada.
            out_features: Dimensão de saída.
            rng: Gerador para a inicialização de Xavier.
            use_bias: Incluir o vetor de viés.
        """
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = self.register_parameter(
            "weight", xavier_init((in_features, out_features), rng)
        )
        self.bias = (
            self.register_parameter("bias", np.zeros(out_features)) if use_bias else None
        )
        self._input: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.in_features:
            raise ShapeError(
                f"Dense espera último eixo {self.in_features}, recebido {x.shape[-1]}",
                details={"shape": list(x.shape)},
            )
        self._input = x
        out = x @ self.weight.value
        if self.bias is not None:
            out = out + self.bias.value
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._input.reshape(-1, self.in_features)
        g = grad.reshape(-1, self.out_features)
        self.weight.grad += x.T @ g
        if self.bias is not None:
            self.bias.grad += g.sum(axis=0)
        return grad @ self.weight.value.T


class ReLU(Module):
    def __init__(self) -> None:
        super().__init__()
        self.last_input: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.last_input = x
        return np.maximum(x, 0.0)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad * (self.last_input > 0)


class Dropout(Module):
    """Dropout invertido: identidade em avaliação, escala 1/(1-p) em treino."""

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"taxa de dropout deve estar em [0, 1), recebido {rate}")
        self.rate = rate
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if not self.training or self.rate == 0.0:
            self._mask = None
            return x
        keep = self.rng.random(x.shape) >= self.rate
        self._mask = as_tensor(keep) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return grad
        return grad * self._mask


class LayerNorm(Module):
    """Normalização sobre o último eixo com escala e deslocamento aprendidos."""

    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        self.eps = eps
        self.gamma = self.register_parameter("gamma", np.ones(dim))
        self.beta = self.register_parameter("beta", np.zeros(dim))
        self._normalized: np.ndarray | None = None
        self._inv_std: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        mean = x.mean(axis=-1, keepdims=True)
        centered = x - mean
        variance = (centered**2).mean(axis=-1, keepdims=True)
        self._inv_std = 1.0 / np.sqrt(variance + self.eps)
        self._normalized = centered * self._inv_std
        return self.gamma.value * self._normalized + self.beta.value

    def backward(self, grad: np.ndarray) -> np.ndarray:
        dim = grad.shape[-1]
        xhat = self._normalized
        self.gamma.grad += (grad * xhat).reshape(-1, dim).sum(axis=0)
        self.beta.grad += grad.reshape(-1, dim).sum(axis=0)
        dxhat = grad * self.gamma.value
        return self._inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )


class BatchNorm1d(Module):
    """
    BatchNorm sobre o eixo do lote para entradas [N, F].

    Em treino usa estatísticas do lote (variância enviesada) e atualiza as
    médias móveis com momentum; em avaliação usa as médias móveis.
    """

    def __init__(self, dim: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.gamma = self.register_parameter("gamma", np.ones(dim))
        self.beta = self.register_parameter("beta", np.zeros(dim))
        self.register_buffer("running_mean", np.zeros(dim))
        self.register_buffer("running_var", np.ones(dim))
        self._normalized: np.ndarray | None = None
        self._inv_std: np.ndarray | None = None
        self._batch_mode = True

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2:
            raise ShapeError(f"BatchNorm1d espera [N, F], recebido {x.shape}")
        if self.training:
            if x.shape[0] < 2:
                raise ShapeError("BatchNorm1d em modo treino exige lote com N ≥ 2")
            mean = x.mean(axis=0)
            variance = x.var(axis=0)
            m = self.momentum
            self._buffers["running_mean"] = (1.0 - m) * self._buffers["running_mean"] + m * mean
            self._buffers["running_var"] = (1.0 - m) * self._buffers["running_var"] + m * variance
        else:
            mean = self._buffers["running_mean"]
            variance = self._buffers["running_var"]
        self._batch_mode = self.training
        self._inv_std = 1.0 / np.sqrt(variance + self.eps)
        self._normalized = (x - mean) * self._inv_std
        return self.gamma.value * self._normalized + self.beta.value

    def backward(self, grad: np.ndarray) -> np.ndarray:
        xhat = self._normalized
        self.gamma.grad += (grad * xhat).sum(axis=0)
        self.beta.grad += grad.sum(axis=0)
        dxhat = grad * self.gamma.value
        if not self._batch_mode:
            return dxhat * self._inv_std
        n = grad.shape[0]
        return (self._inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
        )


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def softmax_backward(probs: np.ndarray, grad: np.ndarray, axis: int = -1) -> np.ndarray:
    return probs * (grad - (grad * probs).sum(axis=axis, keepdims=True))


class Softmax(Module):
    def __init__(self, axis: int = -1):
        super().__init__()
        self.axis = axis
        self._output: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._output = softmax(x, axis=self.axis)
        return self._output

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return softmax_backward(self._output, grad, axis=self.axis)


class Sequential(Module):
    """Composição linear de módulos."""

    def __init__(self, *modules: Module):
        super().__init__()
        self.layers = list(modules)
        for index, module in enumerate(self.layers):
            self.register_module(str(index), module)

    def forward(self, x: np.ndarray) -> np.ndarray:
        for module in self.layers:
            x = module(x)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for module in reversed(self.layers):
            grad = module.backward(grad)
        return grad
