from .backend import BACKEND_NAME, kernels
from .model import (
    CONV1_OUT,
    CONV2_OUT,
    FLAT_DIM,
    DivergedError,
    ModelParams,
    TrainConfig,
    finite_diff_gradient,
    forward,
    forward_batch,
    init_model,
    input_gradient,
    load_model,
    load_model_metadata,
    predict,
    predict_batch,
    save_model,
    train,
)

__all__ = [
    "BACKEND_NAME", "kernels", "CONV1_OUT", "CONV2_OUT", "FLAT_DIM",
    "DivergedError", "ModelParams", "TrainConfig", "finite_diff_gradient",
    "forward", "forward_batch", "init_model", "input_gradient", "load_model",
    "load_model_metadata",
    "predict", "predict_batch", "save_model", "train",
]
