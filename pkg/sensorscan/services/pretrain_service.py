"""Service layer para o pré-treino auto-supervisionado."""

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from sensorscan.models.feature_extractor import FeatureExtractor, PretrainNetwork
from sensorscan.nn import Adam, as_tensor
from sensorscan.schemas.training import EpochStats, PretrainConfig, SslTasks
from sensorscan.services.augmentation_service import AugmentationService
from sensorscan.utils.errors import ContractError, ShapeError, ValidationError
from sensorscan.utils.logging import get_logger, log_event

logger = get_logger("pretrain")


@dataclass
class LossOutput:
    """Valor escalar da perda e gradiente em relação à entrada."""

    value: float
    grad: np.ndarray


@dataclass
class PretrainBatch:
    """Minibatch intercalado [α(X₁), β(X₁), ...] com máscaras."""

    views: np.ndarray  # [2B, L, D] aumentadas, sem máscara
    masks: np.ndarray  # [2B, L, D] 1 = visível, 0 = mascarado

    @property
    def masked(self) -> np.ndarray:
        return self.views * self.masks


class PretrainService:
    """Service para perdas e laço de pré-treino."""

    @staticmethod
    def loss_reconstruction(
        reconstruction: np.ndarray, target: np.ndarray, masks: np.ndarray
    ) -> LossOutput:
        """
        Erro quadrático médio calculado só nas entradas mascaradas.

        Args:
            reconstruction: Saída da cabeça de reconstrução [B, L, D].
            target: Amostras aumentadas sem máscara [B, L, D].
            masks: Máscaras (0 = mascarado) [B, L, D].

        Returns:
            LossOutput: Média no lote das médias por amostra; gradiente em relação à reconstrução.
        """
        if reconstruction.shape != target.shape or target.shape != masks.shape:
            raise ShapeError("reconstrução, alvo e máscaras devem ter a mesma forma")
        hidden = masks == 0
        counts = hidden.reshape(hidden.shape[0], -1).sum(axis=1)
        if np.any(counts == 0):
            raise ContractError("máscara sem entradas mascaradas chegou à perda de reconstrução")
        diff = (reconstruction - target) * hidden
        per_sample = (diff**2).reshape(diff.shape[0], -1).sum(axis=1) / counts
        batch = reconstruction.shape[0]
        grad = 2.0 * diff / (counts[:, None, None] * batch)
        return LossOutput(value=float(per_sample.mean()), grad=grad)

    @staticmethod
    def loss_ntxent(z: np.ndarray, temperature: float) -> LossOutput:
        """
        NT-Xent sobre 2B embeddings pareadas como (0,1), (2,3), ...

        Similaridade de cosseno; o denominador exclui a auto-similaridade.
        """
        n = z.shape[0]
        if n < 2 or n % 2 != 0:
            raise ShapeError(f"NT-Xent espera 2B ≥ 2 embeddings, recebido {n}")
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ContractError("embedding de norma zero: cosseno indefinido")
        u = z / norms
        logits = u @ u.T / temperature
        np.fill_diagonal(logits, -np.inf)
        positives = np.arange(n) ^ 1

        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        log_denominator = np.log(exp.sum(axis=1)) + logits.max(axis=1)
        losses = log_denominator - logits[np.arange(n), positives]

        # dL/dS: (softmax_linha − one-hot do positivo) / 2B
        grad_logits = exp / exp.sum(axis=1, keepdims=True)
        grad_logits[np.arange(n), positives] -= 1.0
        grad_logits /= n
        grad_u = (grad_logits + grad_logits.T) @ u / temperature
        grad_z = (grad_u - u * (u * grad_u).sum(axis=1, keepdims=True)) / norms
        return LossOutput(value=float(losses.mean()), grad=grad_z)

    @staticmethod
    def loss_total(loss_rec: float, loss_cont: float, lambda_cont: float) -> float:
        """L_rec + λ_cont · L_cont."""
        return loss_rec + lambda_cont * loss_cont

    @staticmethod
    def build_batch(
        windows: np.ndarray, indices: np.ndarray, cfg: PretrainConfig, epoch: int
    ) -> PretrainBatch:
        """Aumentos fraco/forte intercalados e máscaras independentes por vista."""
        length, n_channels = windows.shape[1], windows.shape[2]
        views = np.empty((2 * len(indices), length, n_channels))
        masks = np.empty_like(views)
        for position, index in enumerate(indices):
            rng = np.random.default_rng([cfg.seed, epoch, int(index)])
            sample = windows[index]
            views[2 * position] = AugmentationService.weak_augment(sample, cfg.augment, rng)
            views[2 * position + 1] = AugmentationService.strong_augment(sample, cfg.augment, rng)
            for offset in (0, 1):
                masks[2 * position + offset] = AugmentationService.gen_mask(
                    length, n_channels, cfg.mask, rng
                )
        return PretrainBatch(views=as_tensor(views), masks=as_tensor(masks))

    @staticmethod
    def train_step(
        network: PretrainNetwork, optimizer: Adam, batch: PretrainBatch, cfg: PretrainConfig
    ) -> tuple[float, float, float]:
        """Um passo de Adam sobre a perda combinada; retorna (L_rec, L_cont, L_total)."""
        use_rec = cfg.tasks in (SslTasks.BOTH, SslTasks.RECONSTRUCTION)
        use_cont = cfg.tasks in (SslTasks.BOTH, SslTasks.CONTRASTIVE)
        # sem a tarefa de reconstrução, as vistas entram sem máscara
        inputs = batch.masked if use_rec else batch.views
        reconstruction, embeddings = network(inputs)

        loss_rec, grad_rec = 0.0, None
        if use_rec:
            rec = PretrainService.loss_reconstruction(reconstruction, batch.views, batch.masks)
            loss_rec, grad_rec = rec.value, rec.grad
        loss_cont, grad_cont = 0.0, None
        if use_cont:
            cont = PretrainService.loss_ntxent(embeddings, cfg.temperature)
            lam = cfg.lambda_cont if use_rec else 1.0
            loss_cont, grad_cont = cont.value, cont.grad * lam

        network.backward((grad_rec, grad_cont))
        optimizer.step()
        lam = cfg.lambda_cont if use_rec else 1.0
        return loss_rec, loss_cont, PretrainService.loss_total(loss_rec, loss_cont, lam)

    @staticmethod
    def pretrain_epoch(
        network: PretrainNetwork,
        optimizer: Adam,
        windows: np.ndarray,
        cfg: PretrainConfig,
        epoch: int,
    ) -> EpochStats:
        """
        Uma época: permutação das janelas, minibatches de tamanho B (o último parcial é descartado).

        Args:
            network: Extrator + cabeça de reconstrução.
            optimizer: Adam sobre os parâmetros da rede.
            windows: Janelas não rotuladas [N, L, D].
            cfg: Configuração do pré-treino.
            epoch: Índice da época (entra na derivação das seeds).

        Returns:
            EpochStats: Médias de L_rec, L_cont e L_total nos minibatches.
        """
        n = windows.shape[0]
        if n < cfg.batch_size:
            raise ValidationError(
                f"pré-treino exige ao menos B={cfg.batch_size} janelas, recebido {n}"
            )
        started = time.perf_counter()
        network.train()
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        totals = np.zeros(3)
        n_batches = n // cfg.batch_size
        for b in range(n_batches):
            indices = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            batch = PretrainService.build_batch(windows, indices, cfg, epoch)
            totals += PretrainService.train_step(network, optimizer, batch, cfg)
        loss_rec, loss_cont, loss_total = totals / n_batches
        return EpochStats(
            epoch=epoch,
            loss_rec=float(loss_rec),
            loss_cont=float(loss_cont),
            loss_total=float(loss_total),
            wall_time=time.perf_counter() - started,
        )

    @staticmethod
    def build_optimizer(network: PretrainNetwork, cfg: PretrainConfig) -> Adam:
        return Adam(network.named_parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)

    @staticmethod
    def pretrain(
        network: PretrainNetwork,
        windows: np.ndarray,
        cfg: PretrainConfig,
        on_epoch: Optional[Callable[[EpochStats], None]] = None,
        optimizer: Optional[Adam] = None,
        start_epoch: int = 0,
    ) -> FeatureExtractor:
        """
        Executa as épocas [start_epoch, E) e descarta a cabeça de reconstrução.

        O gerador do dropout é derivado de (seed, época), então retomar de um
        checkpoint com rede e otimizador restaurados reproduz a execução contínua.

        Args:
            network: Extrator + cabeça de reconstrução.
            windows: Janelas não rotuladas [N, L, D].
            cfg: Configuração do pré-treino.
            on_epoch: Callback chamado ao fim de cada época.
            optimizer: Adam já existente (p.ex. restaurado); criado se None.
            start_epoch: Primeira época a executar.

        Returns:
            FeatureExtractor: 𝓕 em modo de avaliação (com E = 0, o extrator inicial).
        """
        optimizer = optimizer or PretrainService.build_optimizer(network, cfg)
        for epoch in range(start_epoch, cfg.epochs):
            network.set_rng(np.random.default_rng([cfg.seed, 1, epoch]))
            stats = PretrainService.pretrain_epoch(network, optimizer, windows, cfg, epoch)
            log_event(
                logger,
                f"época {epoch + 1}/{cfg.epochs}",
                epoch=stats.epoch,
                L_rec=round(stats.loss_rec, 6),
                L_cont=round(stats.loss_cont, 6),
                L_total=round(stats.loss_total, 6),
                wall_time=round(stats.wall_time, 3),
            )
            if on_epoch is not None:
                on_epoch(stats)
        network.eval()
        return network.extractor
