"""Núcleo diferenciável mínimo em numpy (forward/backward explícitos)."""

from .attention import MultiHeadSelfAttention
from .base_module import Module
from .checkpoint import (
    CHECKPOINT_VERSION,
    Checkpoint,
    load_checkpoint,
    restore_module,
    restore_optimizer,
    save_checkpoint,
)
from .gradcheck import grad_check
from .init import sinusoidal_positional_encoding, xavier_init
from .layers import (
    BatchNorm1d,
    Dense,
    Dropout,
    LayerNorm,
    ReLU,
    Sequential,
    Softmax,
    softmax,
    softmax_backward,
)
from .optim import Adam
from .parameter import Parameter, as_tensor, default_dtype
from .transformer import TransformerEncoderLayer

__all__ = [
    "Parameter",
    "Module",
    "Dense",
    "ReLU",
    "Dropout",
    "LayerNorm",
    "BatchNorm1d",
    "Softmax",
    "Sequential",
    "softmax",
    "softmax_backward",
    "MultiHeadSelfAttention",
    "TransformerEncoderLayer",
    "sinusoidal_positional_encoding",
    "xavier_init",
    "Adam",
    "grad_check",
    "Checkpoint",
    "CHECKPOINT_VERSION",
    "save_checkpoint",
    "load_checkpoint",
    "restore_module",
    "restore_optimizer",
    "as_tensor",
    "default_dtype",
]
