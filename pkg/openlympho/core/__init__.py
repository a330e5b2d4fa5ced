"""Core of the network toolkit: exceptions, helpers and the tensor operations."""

from .core import (ShapeError, RecordFormatError, RasterFormatError, ExtractionError, SplitError,
                   ModelFileError, DivergenceError, VotingError, GradientCheckError,
                   find_layers, relative_error, resolve_dtype)
from .numerics import (ConvLayerParams, DenseLayerParams, PoolIndex, im2col, conv2d_valid, conv2d_naive,
                       conv2d_backward, maxpool, maxpool_backward, dense, dense_backward, tanh_map,
                       tanh_backward, softmax, softmax_xent)

__all__ = [
    "ShapeError",
    "RecordFormatError",
    "RasterFormatError",
    "ExtractionError",
    "SplitError",
    "ModelFileError",
    "DivergenceError",
    "VotingError",
    "GradientCheckError",
    "find_layers",
    "relative_error",
    "resolve_dtype",
    "ConvLayerParams",
    "DenseLayerParams",
    "PoolIndex",
    "im2col",
    "conv2d_valid",
    "conv2d_naive",
    "conv2d_backward",
    "maxpool",
    "maxpool_backward",
    "dense",
    "dense_backward",
    "tanh_map",
    "tanh_backward",
    "softmax",
    "softmax_xent",
]
