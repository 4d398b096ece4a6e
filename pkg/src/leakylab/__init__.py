"""Deep leaky-ReLU networks: training, gradient checks, rate bounds and lemma probes."""

from .errors import ContractError, ConvergenceError, DataError, DivergenceError, LossOverflowError
from .linalg import Rng
from .net import Activation, NetworkShape, Params, forward, forward_batch, init_params, predict
from .losses import ExpLambda, HalfMSE, SoftmaxCE
from .data import Dataset, SyntheticConfig, gen_synthetic, separation_delta
from .train import TrainConfig, estimate_rate, train
from .theory import BoundConstants, BoundInputs, rate_factor

__version__ = "0.1.0"

__all__ = [
    "Activation", "BoundConstants", "BoundInputs", "ContractError", "ConvergenceError",
    "DataError", "Dataset", "DivergenceError", "ExpLambda", "HalfMSE", "LossOverflowError",
    "NetworkShape", "Params", "Rng", "SoftmaxCE", "SyntheticConfig", "TrainConfig",
    "estimate_rate", "forward", "forward_batch", "gen_synthetic", "init_params", "predict",
    "rate_factor", "separation_delta", "train",
]
