"""Hyperparameter optimization strategies and a random-forest tuning harness."""
from .core import Budget, StrategyResult, Trial, run_strategy
from .errors import TuneError
from .forest import LabeledDataset, RFHyperParams, predict, predict_batch, train_forest
from .space import Categorical, ContinuousRange, IntegerRange, SearchSpace, Values, decode, encode, enumerate_grid, sample

__version__ = "0.1.0"

__all__ = [
    "Budget", "Categorical", "ContinuousRange", "IntegerRange", "LabeledDataset", "RFHyperParams",
    "SearchSpace", "StrategyResult", "Trial", "TuneError", "Values", "decode", "encode", "enumerate_grid",
    "predict", "predict_batch", "run_strategy", "sample", "train_forest",
]
