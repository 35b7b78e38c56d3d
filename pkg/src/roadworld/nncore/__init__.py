from .tensor import Tensor, concat, conv2d, default_dtype, set_default_dtype, stack, use_dtype
from .store import ParamStore
from .modules import MLP, AdaLN, Conv2d, Linear, ResidualFF, adaln_modulate, sinusoidal_features
from .attention import KVCache, frame_causal_attention
from .losses import laplace_nll, mhp_loss, mhp_winner_indices
from .bottleneck import GaussianBottleneck, capacity_noise_sigma, channel_capacity_bits
from .optim import Adam, adam_step
from .checkpoint import load_checkpoint, load_into_store, save_checkpoint, save_store
from .gradcheck import max_relative_gradient_error
from .random import sample_logit_normal

__all__ = [
    "Tensor", "concat", "stack", "conv2d", "default_dtype", "set_default_dtype", "use_dtype",
    "ParamStore", "Linear", "Conv2d", "MLP", "ResidualFF", "AdaLN", "adaln_modulate",
    "sinusoidal_features", "KVCache", "frame_causal_attention",
    "laplace_nll", "mhp_loss", "mhp_winner_indices",
    "GaussianBottleneck", "capacity_noise_sigma", "channel_capacity_bits",
    "Adam", "adam_step", "load_checkpoint", "load_into_store", "save_checkpoint", "save_store",
    "max_relative_gradient_error", "sample_logit_normal",
]
