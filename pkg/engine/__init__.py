"""Training engine for sparse oblique forests."""

from .calibrate import CrossoverCalibration, calibrate_crossover, make_split_probes
from .config_builder import SplitMode, TrainConfig
from .forest import Forest, predict, predict_batch, train_forest, train_tree
from .model_io import ModelFormatError, load_model, save_model

__all__ = [
    'CrossoverCalibration', 'calibrate_crossover', 'make_split_probes',
    'SplitMode', 'TrainConfig',
    'Forest', 'predict', 'predict_batch', 'train_forest', 'train_tree',
    'ModelFormatError', 'load_model', 'save_model',
]
