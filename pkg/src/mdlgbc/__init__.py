"""Boundary-aware granular-ball classification by minimum description length."""

from .dataset import DataError, FoldPlan, load_csv, stratified_folds
from .evaluation import EvalReport, accuracy, cross_validate, macro_f1
from .model_io import ModelFormatError, load_model, save_model
from .predictor import predict, predict_labels, scores
from .trainer import InvariantError, TrainedModel, fit

__all__ = [
    "DataError", "EvalReport", "FoldPlan", "InvariantError", "ModelFormatError", "TrainedModel",
    "accuracy", "cross_validate", "fit", "load_csv", "load_model", "macro_f1", "predict",
    "predict_labels", "save_model", "scores", "stratified_folds",
]
__version__ = "0.1.0"
