from .algorithms import (
    Learner, UpdateResult, critic_loss, ddpg_target, ddpg_update, deterministic_actor_loss, sac_actor_loss,
    sac_target, sac_update, td3_target, td3_update,
)
from .buffers import ExpertBuffer, Minibatch, ReplayBuffer, SumTree, per_sample, per_update_priorities
from .hyper import HyperParams
from .train import CSV_COLUMNS, MODES, EpisodeRecord, TrainLog, online_train, pretrain, select_action

__all__ = [
    "CSV_COLUMNS", "MODES", "EpisodeRecord", "ExpertBuffer", "HyperParams", "Learner", "Minibatch",
    "ReplayBuffer", "SumTree", "TrainLog", "UpdateResult", "critic_loss", "ddpg_target", "ddpg_update",
    "deterministic_actor_loss", "online_train", "per_sample", "per_update_priorities", "pretrain",
    "sac_actor_loss", "sac_target", "sac_update", "select_action", "td3_target", "td3_update",
]
