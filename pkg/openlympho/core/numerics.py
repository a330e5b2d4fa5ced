"""Dense tensor operations of the patch network.

Every operation works on numpy arrays and keeps the dtype of its input, so the
same code runs in float32 (training, inference) and float64 (gradient checking).
Spatial operations accept a single sample [C, H, W] or a batch [N, C, H, W];
dense operations accept [in] or [N, in]. Outputs have the rank of the input.

- ConvLayerParams / DenseLayerParams: the parameter blocks
- conv2d_valid, conv2d_naive, conv2d_backward: valid (unpadded) convolution
- maxpool, maxpool_backward: floor-mode max pooling with argmax routing
- dense, dense_backward: fully connected layer
- tanh_map, tanh_backward, softmax, softmax_xent: activations and the loss
"""

# package(s) for data handling
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import ShapeError


# *** Parameter blocks
class ConvLayerParams(object):
    """Parameters of a convolutional layer

    kernels: array of shape [F, C, K, K]
    bias: array of shape [F]"""

    def __init__(self, kernels, bias):
        kernels = np.asarray(kernels)
        bias = np.asarray(bias)

        if kernels.ndim != 4:
            raise ShapeError('conv kernels must have 4 dims [F, C, Kh, Kw], got shape {}'.format(kernels.shape))
        features, channels, kh, kw = kernels.shape
        if features < 1 or channels < 1 or kh < 1:
            raise ShapeError('conv kernels need F >= 1, C >= 1, K >= 1, got shape {}'.format(kernels.shape))
        if kh != kw:
            raise ShapeError('conv kernels must be square, got {}x{}'.format(kh, kw))
        if bias.shape != (features,):
            raise ShapeError('conv bias must have shape ({},), got {}'.format(features, bias.shape))

        self.kernels = kernels
        self.bias = bias

    @property
    def features(self):
        return self.kernels.shape[0]

    @property
    def channels(self):
        return self.kernels.shape[1]

    @property
    def kernel_side(self):
        return self.kernels.shape[2]

    def arrays(self):
        """kernels before bias (the serialization order)"""
        return [self.kernels, self.bias]

    def size(self):
        return self.kernels.size + self.bias.size

    def astype(self, dtype):
        return ConvLayerParams(self.kernels.astype(dtype), self.bias.astype(dtype))

    def copy(self):
        return ConvLayerParams(self.kernels.copy(), self.bias.copy())


class DenseLayerParams(object):
    """Parameters of a fully connected layer

    weights: array of shape [out, in]
    bias: array of shape [out]"""

    def __init__(self, weights, bias):
        weights = np.asarray(weights)
        bias = np.asarray(bias)

        if weights.ndim != 2 or weights.shape[0] < 1 or weights.shape[1] < 1:
            raise ShapeError('dense weights must have shape [out, in] with out, in >= 1, got {}'.format(weights.shape))
        if bias.shape != (weights.shape[0],):
            raise ShapeError('dense bias must have shape ({},), got {}'.format(weights.shape[0], bias.shape))

        self.weights = weights
        self.bias = bias

    @property
    def units(self):
        return self.weights.shape[0]

    @property
    def inputs(self):
        return self.weights.shape[1]

    def arrays(self):
        """weights before bias (the serialization order)"""
        return [self.weights, self.bias]

    def size(self):
        return self.weights.size + self.bias.size

    def astype(self, dtype):
        return DenseLayerParams(self.weights.astype(dtype), self.bias.astype(dtype))

    def copy(self):
        return DenseLayerParams(self.weights.copy(), self.bias.copy())


class PoolIndex(object):
    """Argmax map of a max pooling call

    input_shape: batched input shape [N, C, H, W]
    index: flat (row-major, within the H x W plane) winner position per output cell, [N, C, H', W']
    batched: False when the forward call received a single sample"""

    def __init__(self, input_shape, index, batched=True):
        self.input_shape = tuple(input_shape)
        self.index = index
        self.batched = batched

    @property
    def output_shape(self):
        return self.index.shape if self.batched else self.index.shape[1:]


# *** Helpers
def _batched(x, sample_ndim, what='input'):
    """return (x with a leading batch axis, True if x already had one)"""

    x = np.asarray(x)
    if x.ndim == sample_ndim:
        return x[np.newaxis], False
    if x.ndim == sample_ndim + 1:
        return x, True

    raise ShapeError('{} must have {} or {} dims, got shape {}'.format(what, sample_ndim, sample_ndim + 1, x.shape))


def _unbatch(x, batched):
    return x if batched else x[0]


def _check_conv(input_shape, params):
    _, channels, height, width = input_shape
    side = params.kernel_side
    if channels != params.channels:
        raise ShapeError('conv input has {} channels, kernels expect {}'.format(channels, params.channels))
    if height < side or width < side:
        raise ShapeError('conv input {}x{} is smaller than the {}x{} kernel'.format(height, width, side, side))


def im2col(x, kh, kw):
    """Lower a batch [N, C, H, W] to sliding-window rows [N, H'*W', C*kh*kw].

    Columns are ordered (channel, kernel row, kernel column), matching
    kernels.reshape(F, -1)."""

    n, channels, height, width = x.shape
    out_h, out_w = height - kh + 1, width - kw + 1
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))  # [N, C, H', W', kh, kw]

    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n, out_h * out_w, channels * kh * kw)


# *** Convolution
def conv2d_valid(input, params):
    """Valid convolution: out[f,i,j] = bias[f] + sum_{c,a,b} input[c,i+a,j+b] * kernels[f,c,a,b]

    Computed by im2col followed by a single matrix product."""

    x, batched = _batched(input, 3)
    _check_conv(x.shape, params)

    n, _, height, width = x.shape
    side = params.kernel_side
    out_h, out_w = height - side + 1, width - side + 1
    dtype = np.result_type(x, params.kernels)

    cols = im2col(x.astype(dtype, copy=False), side, side)
    kernel_matrix = params.kernels.astype(dtype, copy=False).reshape(params.features, -1)
    out = cols @ kernel_matrix.T + params.bias.astype(dtype, copy=False)  # [N, H'*W', F]
    out = np.ascontiguousarray(out.transpose(0, 2, 1).reshape(n, params.features, out_h, out_w))

    return _unbatch(out, batched)


def conv2d_naive(input, params):
    """Reference convolution by explicit loops; the correctness oracle of conv2d_valid"""

    x, batched = _batched(input, 3)
    _check_conv(x.shape, params)

    n, channels, height, width = x.shape
    side = params.kernel_side
    out_h, out_w = height - side + 1, width - side + 1
    dtype = np.result_type(x, params.kernels)
    out = np.zeros((n, params.features, out_h, out_w), dtype=dtype)

    for sample in range(n):
        for f in range(params.features):
            for i in range(out_h):
                for j in range(out_w):
                    total = float(params.bias[f])
                    for c in range(channels):
                        for a in range(side):
                            for b in range(side):
                                total += float(x[sample, c, i + a, j + b]) * float(params.kernels[f, c, a, b])
                    out[sample, f, i, j] = total

    return _unbatch(out, batched)


def conv2d_backward(input, params, grad_out):
    """Gradients of sum(grad_out * conv2d_valid(input, params))

    returns (grad_input, ConvLayerParams holding the kernel and bias gradients)"""

    x, batched = _batched(input, 3)
    _check_conv(x.shape, params)
    g = np.asarray(grad_out)
    if not batched:
        g = g[np.newaxis]

    n, channels, height, width = x.shape
    side = params.kernel_side
    out_h, out_w = height - side + 1, width - side + 1
    expected = (n, params.features, out_h, out_w)
    if g.shape != expected:
        raise ShapeError('conv grad_out has shape {}, expected {}'.format(
            g.shape if batched else g.shape[1:], expected if batched else expected[1:]))

    dtype = np.result_type(x, params.kernels, g)
    cols = im2col(x.astype(dtype, copy=False), side, side)  # [N, P, C*K*K]
    g_rows = g.astype(dtype, copy=False).reshape(n, params.features, out_h * out_w)  # [N, F, P]
    kernel_matrix = params.kernels.astype(dtype, copy=False).reshape(params.features, -1)

    grad_kernels = np.tensordot(g_rows, cols, axes=([0, 2], [0, 1])).reshape(params.kernels.shape)
    grad_bias = g_rows.sum(axis=(0, 2))

    # col2im: scatter every kernel offset back onto the input plane
    grad_cols = (g_rows.transpose(0, 2, 1) @ kernel_matrix).reshape(n, out_h, out_w, channels, side, side)
    grad_input = np.zeros((n, channels, height, width), dtype=dtype)
    for a in range(side):
        for b in range(side):
            grad_input[:, :, a:a + out_h, b:b + out_w] += grad_cols[:, :, :, :, a, b].transpose(0, 3, 1, 2)

    return _unbatch(grad_input, batched), ConvLayerParams(grad_kernels, grad_bias)


# *** Pooling
def maxpool(input, k, s):
    """Floor-mode max pooling with window k and stride s.

    Rows and columns not covered by a full window are ignored. The first maximum
    in row-major order wins each window. returns (output, PoolIndex)"""

    x, batched = _batched(input, 3)
    n, channels, height, width = x.shape
    if k < 1 or s < 1:
        raise ShapeError('pool window and stride must be >= 1, got k={} s={}'.format(k, s))
    if height < k or width < k:
        raise ShapeError('pool window {}x{} is larger than the {}x{} input'.format(k, k, height, width))

    out_h = (height - k) // s + 1
    out_w = (width - k) // s + 1
    windows = sliding_window_view(x, (k, k), axis=(2, 3))[:, :, ::s, ::s]
    windows = windows.reshape(n, channels, out_h, out_w, k * k)

    winner = np.argmax(windows, axis=-1)
    out = np.take_along_axis(windows, winner[..., np.newaxis], axis=-1)[..., 0]

    rows = np.arange(out_h).reshape(out_h, 1) * s + winner // k
    cols = np.arange(out_w).reshape(1, out_w) * s + winner % k
    index = PoolIndex(x.shape, rows * width + cols, batched)

    return _unbatch(np.ascontiguousarray(out), batched), index


def maxpool_backward(argmax_index_map, grad_out):
    """Route grad_out onto the recorded winners; every other input position gets zero"""

    g = np.asarray(grad_out)
    if not argmax_index_map.batched:
        g = g[np.newaxis]
    if g.shape != argmax_index_map.index.shape:
        raise ShapeError('pool grad_out has shape {}, argmax map expects {}'.format(
            np.asarray(grad_out).shape, argmax_index_map.output_shape))

    n, channels, height, width = argmax_index_map.input_shape
    plane = height * width
    offsets = (np.arange(n * channels) * plane).reshape(n, channels, 1, 1)
    flat = (argmax_index_map.index + offsets).ravel()
    grad_input = np.bincount(flat, weights=g.ravel(), minlength=n * channels * plane)
    grad_input = grad_input.astype(g.dtype).reshape(n, channels, height, width)

    return _unbatch(grad_input, argmax_index_map.batched)


# *** Fully connected
def dense(input, params):
    """out = weights . input + bias"""

    x, batched = _batched(input, 1)
    if x.shape[1] != params.inputs:
        raise ShapeError('dense input has length {}, weights expect {}'.format(x.shape[1], params.inputs))

    dtype = np.result_type(x, params.weights)
    out = x.astype(dtype, copy=False) @ params.weights.astype(dtype, copy=False).T + params.bias.astype(dtype, copy=False)

    return _unbatch(out, batched)


def dense_backward(input, params, grad_out):
    """returns (grad_input, DenseLayerParams holding the weight and bias gradients)"""

    x, batched = _batched(input, 1)
    g = np.asarray(grad_out)
    if not batched:
        g = g[np.newaxis]
    if x.shape[1] != params.inputs or g.shape != (x.shape[0], params.units):
        raise ShapeError('dense backward got input {} and grad_out {} for weights {}'.format(
            np.asarray(input).shape, np.asarray(grad_out).shape, params.weights.shape))

    dtype = np.result_type(x, params.weights, g)
    x = x.astype(dtype, copy=False)
    g = g.astype(dtype, copy=False)
    grad_input = g @ params.weights.astype(dtype, copy=False)
    grad_weights = g.T @ x
    grad_bias = g.sum(axis=0)

    return _unbatch(grad_input, batched), DenseLayerParams(grad_weights, grad_bias)


# *** Activations and loss
def tanh_map(input):
    return np.tanh(input)


def tanh_backward(output, grad_out):
    """d tanh(x) = (1 - y^2) with y = tanh(x)"""

    output = np.asarray(output)
    grad_out = np.asarray(grad_out)
    if output.shape != grad_out.shape:
        raise ShapeError('tanh output {} and grad_out {} differ in shape'.format(output.shape, grad_out.shape))

    return (1 - output * output) * grad_out


def softmax(input):
    """Stabilized softmax over the last axis"""

    x = np.asarray(input)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ShapeError('softmax needs at least one logit, got shape {}'.format(x.shape))

    shifted = np.exp(x - np.max(x, axis=-1, keepdims=True))

    return shifted / np.sum(shifted, axis=-1, keepdims=True)


def softmax_xent(logits, label):
    """Cross-entropy of softmax(logits) against an integer label.

    Single sample: returns (loss, grad_logits). Batch [N, n] with N labels:
    returns (per-sample losses [N], per-sample gradients [N, n])."""

    z, batched = _batched(logits, 1, what='logits')
    labels = np.atleast_1d(np.asarray(label))
    classes = z.shape[1]

    if labels.shape != (z.shape[0],):
        raise ShapeError('got {} labels for {} logit rows'.format(labels.size, z.shape[0]))
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise ValueError('labels must be integers, got {}'.format(labels))
        labels = labels.astype(np.int64)
    if np.any(labels < 0) or np.any(labels >= classes):
        raise ValueError('label out of range 0..{}: {}'.format(classes - 1, labels[(labels < 0) | (labels >= classes)]))

    peak = np.max(z, axis=1, keepdims=True)
    log_norm = peak[:, 0] + np.log(np.sum(np.exp(z - peak), axis=1))
    rows = np.arange(z.shape[0])
    losses = log_norm - z[rows, labels]

    grad = softmax(z)
    grad[rows, labels] -= 1

    if batched:
        return losses, grad

    return float(losses[0]), grad[0]
