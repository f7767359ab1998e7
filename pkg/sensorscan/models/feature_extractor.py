"""Extrator de características 𝓕 = ℋ ∘ 𝒫 ∘ 𝒯 e redes compostas."""

import numpy as np

from sensorscan.models.heads import ClusterHead, ProjectionHead, ReconstructionHead
from sensorscan.nn import Dense, Dropout, Module, TransformerEncoderLayer, softmax
from sensorscan.nn.init import sinusoidal_positional_encoding, xavier_init
from sensorscan.schemas.model import ModelConfig
from sensorscan.utils.errors import ShapeError


class Encoder(Module):
    """𝒯: densa D → H, encoding posicional somado, dropout e n_layers camadas Transformer."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.n_channels = cfg.n_channels
        self.hidden_dim = cfg.hidden_dim
        self.input_projection = self.register_module(
            "input_projection", Dense(cfg.n_channels, cfg.hidden_dim, rng)
        )
        self.input_dropout = self.register_module("input_dropout", Dropout(cfg.dropout))
        self.layers = [
            TransformerEncoderLayer(cfg.hidden_dim, cfg.heads, cfg.ff_dim, cfg.dropout, rng)
            for _ in range(cfg.n_layers)
        ]
        for index, layer in enumerate(self.layers):
            self.register_module(f"layer{index}", layer)
        self.positional_encoding = sinusoidal_positional_encoding(cfg.window_size, cfg.hidden_dim)
        self._squeeze = False

    def forward(self, x: np.ndarray) -> np.ndarray:
        """[N, L, D] (ou [L, D]) → [N, L, H]."""
        self._squeeze = x.ndim == 2
        if self._squeeze:
            x = x[None]
        if x.ndim != 3 or x.shape[-1] != self.n_channels:
            raise ShapeError(f"encoder espera [N, L, {self.n_channels}], recebido {x.shape}")
        length = x.shape[1]
        if length > self.positional_encoding.shape[0]:
            self.positional_encoding = sinusoidal_positional_encoding(length, self.hidden_dim)
        h = self.input_projection(x) + self.positional_encoding[:length]
        h = self.input_dropout(h)
        for layer in self.layers:
            h = layer(h)
        return h[0] if self._squeeze else h

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._squeeze:
            grad = grad[None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        grad = self.input_projection.backward(self.input_dropout.backward(grad))
        return grad[0] if self._squeeze else grad


class SequentialPooling(Module):
    """𝒫: pesos w = softmax(h W_pool) sobre as L posições; saída ĥ = Σ_t w_t h_t."""

    def __init__(self, hidden_dim: int, rng: np.random.Generator):
        super().__init__()
        self.weight = self.register_parameter("weight", xavier_init((hidden_dim, 1), rng))
        self.pool_weights: np.ndarray | None = None
        self._input: np.ndarray | None = None
        self._squeeze = False

    def forward(self, h: np.ndarray) -> np.ndarray:
        """[N, L, H] → [N, H] (ou [L, H] → [H])."""
        self._squeeze = h.ndim == 2
        if self._squeeze:
            h = h[None]
        self._input = h
        scores = (h @ self.weight.value)[..., 0]
        self.pool_weights = softmax(scores, axis=-1)
        pooled = np.einsum("nl,nlh->nh", self.pool_weights, h)
        return pooled[0] if self._squeeze else pooled

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._squeeze:
            grad = grad[None]
        h = self._input
        w = self.pool_weights
        grad_w = np.einsum("nh,nlh->nl", grad, h)
        grad_scores = w * (grad_w - (grad_w * w).sum(axis=-1, keepdims=True))
        self.weight.grad += np.einsum("nl,nlh->h", grad_scores, h)[:, None]
        grad_h = (
            w[..., None] * grad[:, None, :]
            + grad_scores[..., None] * self.weight.value[:, 0][None, None, :]
        )
        return grad_h[0] if self._squeeze else grad_h


class FeatureExtractor(Module):
    """𝓕: L×D → F (encoder, pooling sequencial e cabeça de projeção)."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.cfg = cfg
        self.encoder = self.register_module("encoder", Encoder(cfg, rng))
        self.pooling = self.register_module("pooling", SequentialPooling(cfg.hidden_dim, rng))
        self.projection = self.register_module(
            "projection",
            ProjectionHead(cfg.hidden_dim, cfg.projection_hidden, cfg.embedding_dim, rng),
        )

    def encode(self, x: np.ndarray) -> np.ndarray:
        return self.encoder(x)

    def pool(self, h: np.ndarray) -> np.ndarray:
        return self.pooling(h)

    def project(self, pooled: np.ndarray) -> np.ndarray:
        return self.projection(pooled)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """extract_features: project(pool(encode(x))) para um lote [N, L, D]."""
        return self.project(self.pool(self.encode(x)))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return self.encoder.backward(self.pooling.backward(self.projection.backward(grad)))

    def embed(self, values: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Embeddings [N, F] em modo de avaliação, processadas em lotes."""
        was_training = self.training
        self.eval()
        outputs = [
            self.forward(values[start : start + batch_size])
            for start in range(0, values.shape[0], batch_size)
        ]
        self.train(was_training)
        if not outputs:
            return np.zeros((0, self.cfg.embedding_dim))
        return np.concatenate(outputs, axis=0)


class PretrainNetwork(Module):
    """Extrator + cabeça de reconstrução, treinados juntos no pré-treino."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.cfg = cfg
        self.extractor = self.register_module("extractor", FeatureExtractor(cfg, rng))
        self.reconstruction = self.register_module(
            "reconstruction", ReconstructionHead(cfg.hidden_dim, cfg.n_channels, rng)
        )

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Retorna (reconstrução [N, L, D], embeddings [N, F])."""
        hidden = self.extractor.encode(x)
        reconstruction = self.reconstruction(hidden)
        embeddings = self.extractor.project(self.extractor.pool(hidden))
        return reconstruction, embeddings

    def backward(
        self, grad: tuple[np.ndarray | None, np.ndarray | None]
    ) -> np.ndarray:
        """Soma no encoder os gradientes vindos das duas cabeças."""
        grad_reconstruction, grad_embeddings = grad
        grad_hidden = None
        if grad_reconstruction is not None:
            grad_hidden = self.reconstruction.backward(grad_reconstruction)
        if grad_embeddings is not None:
            grad_pooled = self.extractor.projection.backward(grad_embeddings)
            from_pool = self.extractor.pooling.backward(grad_pooled)
            grad_hidden = from_pool if grad_hidden is None else grad_hidden + from_pool
        return self.extractor.encoder.backward(grad_hidden)


class Classifier(Module):
    """Extrator + cabeça de saída (clusters M̃ ou estados Q)."""

    def __init__(self, extractor: FeatureExtractor, head: ClusterHead):
        super().__init__()
        self.extractor = self.register_module("extractor", extractor)
        self.head = self.register_module("head", head)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.head(self.extractor(x))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return self.extractor.backward(self.head.backward(grad))

    def predict_proba(self, values: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Probabilidades [N, saídas] em modo de avaliação."""
        embeddings = self.extractor.embed(values, batch_size=batch_size)
        was_training = self.head.training
        self.head.eval()
        probs = self.head(embeddings) if len(embeddings) else np.zeros((0, self.head.n_outputs))
        self.head.train(was_training)
        return probs

    def predict(self, values: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Argmax das probabilidades (empates vão para o menor índice)."""
        return np.argmax(self.predict_proba(values, batch_size=batch_size), axis=1)


def build_feature_extractor(cfg: ModelConfig, seed: int) -> FeatureExtractor:
    rng = np.random.default_rng([seed, 0])
    extractor = FeatureExtractor(cfg, rng)
    extractor.set_rng(np.random.default_rng([seed, 1]))
    return extractor


def build_pretrain_network(cfg: ModelConfig, seed: int) -> PretrainNetwork:
    """Cria a rede de pré-treino com inicialização de Xavier determinística."""
    rng = np.random.default_rng([seed, 0])
    network = PretrainNetwork(cfg, rng)
    network.set_rng(np.random.default_rng([seed, 1]))
    return network


def build_cluster_head(cfg: ModelConfig, seed: int, n_outputs: int | None = None) -> ClusterHead:
    """Cabeça 𝒞 com F → largura oculta → n_outputs (padrão: M̃)."""
    rng = np.random.default_rng([seed, 2])
    return ClusterHead(
        cfg.embedding_dim, cfg.cluster_hidden, n_outputs or cfg.n_clusters, rng
    )


def count_parameters(cfg: ModelConfig, n_outputs: int | None = None) -> dict[str, int]:
    """Contagem analítica de parâmetros por componente a partir da configuração."""
    h, d, ff = cfg.hidden_dim, cfg.n_channels, cfg.ff_dim
    p, f, c = cfg.projection_hidden, cfg.embedding_dim, cfg.cluster_hidden
    m = n_outputs or cfg.n_clusters
    attention = 4 * h * h + 3 * h
    layer = attention + 2 * h + (h * ff + ff) + (ff * h + h) + 2 * h
    return {
        "encoder": (d * h + h) + cfg.n_layers * layer,
        "pooling": h,
        "projection": h * p + 2 * p + (p * f + f),
        "reconstruction": h * d + d,
        "cluster_head": f * c + 2 * c + (c * m + m),
    }
