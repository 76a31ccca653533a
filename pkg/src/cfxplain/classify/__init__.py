"""Linear SVC and random-forest sector classifiers."""
from .forest import RfParams, train_random_forest
from .model import ClassifierError, Forest, TrainedClassifier, decision_scores, predict, predict_many
from .persistence import MAGIC, ModelFormatError, load_model, model_from_bytes, model_to_bytes, save_model
from .svc import SvcParams, compute_class_weights, svc_objective, train_linear_svc

__all__ = [
    "SvcParams", "RfParams", "TrainedClassifier", "Forest", "ClassifierError", "ModelFormatError",
    "compute_class_weights", "train_linear_svc", "train_random_forest", "svc_objective",
    "decision_scores", "predict", "predict_many",
    "MAGIC", "save_model", "load_model", "model_to_bytes", "model_from_bytes",
]
