"""A small NumPy-only 1-D convolutional network with exact backprop."""

from .gradcheck import gradient_check, numerical_gradients
from .layers import (
    NumericError,
    ShapeError,
    bce_loss,
    conv1d_backward,
    conv1d_forward,
    dense_backward,
    dense_forward,
    maxpool1d_backward,
    maxpool1d_forward,
    relu,
    sigmoid,
)
from .model import (
    Conv1D,
    Dense,
    Flatten,
    LayerSpec,
    MaxPool1D,
    Model,
    backward,
    default_architecture,
    predict_proba,
    reshape_3d,
    spec_from_dict,
    spec_to_dict,
)
from .serialize import ModelFormatError, dumps_model, load_model, loads_model, save_model
from .training import TrainConfig, TrainingDivergedError, train
