from .layers import LOG_STD_MAX, LOG_STD_MIN, Actor, Network, QNet, TwinCritic, actor_forward, critic_forward, init_dense
from .model import ALGORITHMS, ArchitectureMismatchError, ModelFormatError, ModelParams, load_model, save_model
from .optim import Adam, soft_update
from .policy import gaussian_tanh_log_density, sac_sample, sac_sample_backward, squash_correction

__all__ = [
    "ALGORITHMS", "LOG_STD_MAX", "LOG_STD_MIN", "Actor", "Adam", "ArchitectureMismatchError",
    "ModelFormatError", "ModelParams", "Network", "QNet", "TwinCritic", "actor_forward",
    "critic_forward", "gaussian_tanh_log_density", "init_dense", "load_model", "sac_sample",
    "sac_sample_backward", "save_model", "soft_update", "squash_correction",
]
