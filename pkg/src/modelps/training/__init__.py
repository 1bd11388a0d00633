"""Native mini-trainer: TL method zoo, time-boxed validator, job lifecycle."""

from .config import TL_METHODS, TrainConfig
from .core import EpochSnapshot, LoopControl, sgd_update, train_loop, train_step
from .jobs import (
    COMPLETED,
    FAILED,
    LEGAL_TRANSITIONS,
    PAUSED,
    QUEUED,
    RUNNING,
    TERMINAL,
    TERMINATED,
    JobPool,
    TrainJob,
)
from .losses import cross_entropy, kd_loss, kd_loss_and_grad, log_softmax, mmd, softmax
from .methods import TradaboostEnsemble, TradaboostRun, shrink_graph, tradaboost_fit
from .network import ChainNetwork, Params, clone_params, params_equal, zeros_like_params
from .validator import BoostSnapshot, RunResult, Trainer, ValidationReport

__all__ = [
    "BoostSnapshot",
    "COMPLETED",
    "ChainNetwork",
    "EpochSnapshot",
    "FAILED",
    "JobPool",
    "LEGAL_TRANSITIONS",
    "LoopControl",
    "PAUSED",
    "Params",
    "QUEUED",
    "RUNNING",
    "RunResult",
    "TERMINAL",
    "TERMINATED",
    "TL_METHODS",
    "TradaboostEnsemble",
    "TradaboostRun",
    "TrainConfig",
    "TrainJob",
    "Trainer",
    "ValidationReport",
    "clone_params",
    "cross_entropy",
    "kd_loss",
    "kd_loss_and_grad",
    "log_softmax",
    "mmd",
    "params_equal",
    "sgd_update",
    "shrink_graph",
    "softmax",
    "tradaboost_fit",
    "train_loop",
    "train_step",
    "zeros_like_params",
]
