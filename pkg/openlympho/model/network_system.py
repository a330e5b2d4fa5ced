# package(s) for data handling
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from openlympho.core import *
from openlympho.dataset import PatchRecord, augment_records, records_to_arrays
from .network_defaults import *
from .network_objects import *

history_columns = ['epoch', 'learning_rate', 'train_loss', 'train_accuracy', 'val_loss', 'val_accuracy']


# *** Architecture
class ArchitectureSpec:
    """Ordered layer list of a feed-forward network plus its per-sample input shape.

    The shape chain is resolved on construction; a spec that does not compose
    raises ShapeError naming the first failing layer. The last layer must be a
    dense softmax layer, and no other layer may use softmax."""

    def __init__(self, input_shape=input_shape, elements=[]):
        self.input_shape = tuple(int(dim) for dim in input_shape)
        self.elements = list(elements)

        if not self.elements:
            raise ShapeError('an architecture needs at least one layer')
        last = self.elements[-1]
        if not isinstance(last, DenseLayer) or last.activation != 'softmax':
            raise ShapeError('the last layer must be dense with softmax, got {}'.format(last.name))
        for layer in self.elements[:-1]:
            if getattr(layer, 'activation', None) == 'softmax':
                raise ShapeError('layer {}: softmax is only allowed on the last layer'.format(layer.name))

        self.shapes = self.shape_chain()

    @classmethod
    def from_data(cls, input_shape, architecture):
        """build from (kind, defaults dict) pairs, e.g. network_defaults.default_architecture"""

        return cls(input_shape, [layer_classes[kind](**data) for kind, data in architecture])

    @classmethod
    def default(cls):
        return cls.from_data(input_shape, default_architecture)

    @classmethod
    def toy(cls):
        return cls.from_data(toy_input_shape, toy_architecture)

    def shape_chain(self, input_shape=None):
        """per-sample shapes [input, after layer 1, ..., after layer n]"""

        shape = self.input_shape if input_shape is None else tuple(input_shape)
        if len(shape) != 3 or min(shape) < 1:
            raise ShapeError('input shape must be [C, H, W] with positive dims, got {}'.format(shape))

        shapes = [shape]
        for number, layer in enumerate(self.elements, start=1):
            try:
                shape = layer.infer_shape(shape)
                layer.check_output(shape)
            except ShapeError as error:
                raise ShapeError('layer {} ({}): {}'.format(number, layer.name, error)) from None
            shapes.append(shape)

        return shapes

    @property
    def classes(self):
        return find_layers(self, DenseLayer)[-1].units

    def parameterized(self):
        """indices of the layers that own parameters"""

        return [number for number, layer in enumerate(self.elements) if isinstance(layer, (ConvLayer, DenseLayer))]

    def param_shapes(self):
        return [self.elements[number].param_shapes(self.shapes[number]) for number in self.parameterized()]

    def describe(self):
        """hashable structural summary (pinned shapes and names left out)"""

        description = [self.input_shape]
        for layer in self.elements:
            if isinstance(layer, ConvLayer):
                description.append(('conv', layer.features, layer.kernel_side, layer.activation))
            elif isinstance(layer, PoolLayer):
                description.append(('pool', layer.window, layer.stride))
            elif isinstance(layer, FlattenLayer):
                description.append(('flatten',))
            else:
                description.append(('dense', layer.units, layer.activation))

        return tuple(description)


# *** Parameters
class NetworkParams:
    """Parameter blocks of an ArchitectureSpec, one per conv or dense layer"""

    def __init__(self, spec, blocks):
        self.spec = spec
        self.blocks = list(blocks)

        expected = spec.param_shapes()
        if len(self.blocks) != len(expected):
            raise ShapeError('got {} parameter blocks, the architecture has {} parameterized layers'.format(
                len(self.blocks), len(expected)))
        for number, block, shapes in zip(spec.parameterized(), self.blocks, expected):
            found = [array.shape for array in block.arrays()]
            if found != [tuple(shape) for shape in shapes]:
                raise ShapeError('layer {}: parameter shapes {} differ from {}'.format(
                    spec.elements[number].name, found, shapes))

    @property
    def dtype(self):
        return self.blocks[0].arrays()[0].dtype

    def arrays(self):
        return [array for block in self.blocks for array in block.arrays()]

    def named_arrays(self):
        """[(name, array)] e.g. ('conv1.kernels', ...)"""

        named = []
        for number, block in zip(self.spec.parameterized(), self.blocks):
            layer = self.spec.elements[number]
            kinds = ['kernels', 'bias'] if isinstance(block, ConvLayerParams) else ['weights', 'bias']
            named.extend(('{}.{}'.format(layer.name, kind), array) for kind, array in zip(kinds, block.arrays()))

        return named

    def astype(self, dtype):
        return NetworkParams(self.spec, [block.astype(dtype) for block in self.blocks])

    def copy(self):
        return NetworkParams(self.spec, [block.copy() for block in self.blocks])

    def zeros_like(self):
        return NetworkParams(self.spec, [type(block)(*[np.zeros_like(array) for array in block.arrays()])
                                         for block in self.blocks])

    def size(self):
        return sum(block.size() for block in self.blocks)


def parameter_counts(spec):
    """per-layer table of shapes and parameter counts (of a spec or of NetworkParams)"""

    spec = getattr(spec, 'spec', spec)
    rows = []
    for number, layer in enumerate(spec.elements):
        count = 0
        if isinstance(layer, (ConvLayer, DenseLayer)):
            count = sum(int(np.prod(shape)) for shape in layer.param_shapes(spec.shapes[number]))
        rows.append([layer.name, type(layer).__name__, spec.shapes[number], spec.shapes[number + 1], count])

    return pd.DataFrame(rows, columns=['layer', 'type', 'input_shape', 'output_shape', 'parameters'])


def build_network(spec, seed=0, dtype=np.float32):
    """Glorot-uniform weights U(-r, r) with r = sqrt(6 / (fan_in + fan_out)), zero biases.

    Conv layers use fan_in = C*K*K and fan_out = F*K*K. Values are drawn in
    float64 and then cast, so the two precisions start from the same point."""

    rng = np.random.default_rng(seed)
    blocks = []
    for number in spec.parameterized():
        layer = spec.elements[number]
        weight_shape, bias_shape = layer.param_shapes(spec.shapes[number])
        if isinstance(layer, ConvLayer):
            features, channels, side, _ = weight_shape
            fan_in, fan_out = channels * side * side, features * side * side
        else:
            fan_out, fan_in = weight_shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=weight_shape).astype(dtype)
        bias = np.zeros(bias_shape, dtype=dtype)
        blocks.append(ConvLayerParams(weights, bias) if isinstance(layer, ConvLayer) else DenseLayerParams(weights, bias))

    return NetworkParams(spec, blocks)


# *** Forward and backward passes
def forward(params, batch):
    """Run a batch [B, C, H, W] (or one sample [C, H, W]) through the network.

    Every layer output is checked against the resolved shape chain.
    returns (logits [B, classes], cache); softmax is left to the caller."""

    spec = params.spec
    x = np.asarray(batch)
    if x.ndim == len(spec.input_shape):
        x = x[np.newaxis]
    if x.shape[1:] != spec.input_shape:
        raise ShapeError('input has shape {}, the network expects [B] + {}'.format(x.shape, list(spec.input_shape)))

    blocks = dict(zip(spec.parameterized(), params.blocks))
    cache = []
    for number, layer in enumerate(spec.elements):
        block = blocks.get(number)
        index = None
        if isinstance(layer, ConvLayer):
            y = conv2d_valid(x, block)
        elif isinstance(layer, PoolLayer):
            y, index = maxpool(x, layer.window, layer.stride)
        elif isinstance(layer, FlattenLayer):
            y = x.reshape(x.shape[0], -1)
        else:
            y = dense(x, block)
        if getattr(layer, 'activation', None) == 'tanh':
            y = tanh_map(y)

        if y.shape[1:] != spec.shapes[number + 1]:
            raise ShapeError('layer {} produced {}, expected {}'.format(layer.name, y.shape[1:], spec.shapes[number + 1]))
        cache.append((layer, block, x, y, index))
        x = y

    return x, cache


def backward(params, cache, grad_logits):
    """Reverse-mode pass through a forward cache.

    returns (list of parameter-gradient blocks aligned with params.blocks, gradient w.r.t. the input batch)"""

    g = np.asarray(grad_logits)
    grads = []
    for layer, block, x, y, index in reversed(cache):
        if getattr(layer, 'activation', None) == 'tanh':
            g = tanh_backward(y, g)
        if isinstance(layer, ConvLayer):
            g, grad_block = conv2d_backward(x, block, g)
            grads.append(grad_block)
        elif isinstance(layer, PoolLayer):
            g = maxpool_backward(index, g)
        elif isinstance(layer, FlattenLayer):
            g = g.reshape(x.shape)
        else:
            g, grad_block = dense_backward(x, block, g)
            grads.append(grad_block)

    return grads[::-1], g


def loss_and_gradients(params, X, y):
    """mean cross-entropy of a batch and its gradients

    returns (loss, gradient blocks, logits)"""

    logits, cache = forward(params, X)
    losses, grad_logits = softmax_xent(logits, np.asarray(y))
    grads, _ = backward(params, cache, grad_logits / logits.shape[0])

    return float(np.mean(losses)), grads, logits


def sgd_step(params, grads, velocity, learning_rate, momentum):
    """In place: v <- momentum * v - lr * g, p <- p + v"""

    for p_block, g_block, v_block in zip(params.blocks, grads, velocity.blocks):
        for p, g, v in zip(p_block.arrays(), g_block.arrays(), v_block.arrays()):
            v *= momentum
            v -= learning_rate * g.astype(v.dtype, copy=False)
            p += v


def infer_logits(params, X, threads=1, batch_size=inference_batch_size):
    """Logits of X in fixed chunks; worker count never changes the result"""

    X = np.asarray(X)
    if len(X) == 0:
        return np.zeros((0, params.spec.classes), dtype=params.dtype)

    chunks = [X[start:start + batch_size] for start in range(0, len(X), batch_size)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda chunk: forward(params, chunk)[0], chunks))
    else:
        parts = [forward(params, chunk)[0] for chunk in chunks]

    return np.concatenate(parts)


# *** Training
class Trainer:
    """Minibatch SGD with momentum and step learning-rate decay.

    The parameters with the best validation accuracy (earliest epoch on ties) are
    kept. Initialization and shuffling derive from config.seed, so a fixed seed
    gives bit-identical histories and parameters."""

    def __init__(self, config=None, spec=None, debug=False):
        self.config = TrainConfig(**train_config_data) if config is None else config
        self.spec = ArchitectureSpec.default() if spec is None else spec

        # provide intermediate outputs via print statements if debug = True
        self.debug = debug

        self.history = None
        self.best_epoch = None

    def arrays(self, data, augment=False):
        """(X, y) from PatchRecords or from an (X, y) pair; only records can be augmented"""

        dtype = resolve_dtype(self.config.precision)
        if isinstance(data, list) and all(isinstance(record, PatchRecord) for record in data):
            return records_to_arrays(augment_records(data) if augment else data, dtype)
        if augment:
            raise ValueError('augmentation works on PatchRecords, got arrays')

        X, y = (np.asarray(array) for array in data)
        return X.astype(dtype, copy=False), y

    def train(self, train_data, val_data):
        """train_data and val_data are lists of PatchRecords or (X, y) pairs.

        With config.augment the training records are extended by their rotated and
        flipped copies before the first epoch."""

        config = self.config
        self.best_epoch = None
        dtype = resolve_dtype(config.precision)

        X, y = self.arrays(train_data, augment=config.augment)
        X_val, y_val = self.arrays(val_data)
        if len(X) == 0:
            raise ValueError('the training split is empty')
        if len(X) != len(y) or len(X_val) != len(y_val):
            raise ShapeError('inputs and labels differ in length: {}/{} and {}/{}'.format(
                len(X), len(y), len(X_val), len(y_val)))

        params = build_network(self.spec, seed=config.seed, dtype=dtype)
        velocity = params.zeros_like()
        best_params, best_accuracy = params.copy(), -np.inf
        shuffle = np.random.default_rng([config.seed, 1])

        if self.debug:
            print('')
            print('### Train {} parameters on {} images ({} validation) ###'.format(params.size(), len(X), len(X_val)))

        rows = []
        for epoch in range(config.epochs):
            learning_rate = config.learning_rate_at(epoch)
            order = shuffle.permutation(len(X))
            total_loss, correct = 0.0, 0

            for batch_number, start in enumerate(range(0, len(X), config.batch_size)):
                chosen = order[start:start + config.batch_size]
                loss, grads, logits = loss_and_gradients(params, X[chosen], y[chosen])
                if not np.isfinite(loss):
                    raise DivergenceError('non-finite loss {} at epoch {}, batch {}'.format(loss, epoch + 1, batch_number))
                sgd_step(params, grads, velocity, learning_rate, config.momentum)

                total_loss += loss * len(chosen)
                correct += int(np.sum(np.argmax(logits, axis=1) == y[chosen]))

            val_loss, val_accuracy = self.validate(params, X_val, y_val)
            rows.append([epoch + 1, learning_rate, total_loss / len(X), correct / len(X), val_loss, val_accuracy])

            if not np.isnan(val_accuracy) and val_accuracy > best_accuracy:
                best_params, best_accuracy, self.best_epoch = params.copy(), val_accuracy, epoch + 1

            if self.debug:
                print('--- epoch {:3d}  lr {:.5f}  loss {:.4f}  acc {:.4f}  val_loss {:.4f}  val_acc {:.4f}'.format(*rows[-1]))

        self.history = pd.DataFrame(rows, columns=history_columns)

        # no validation data: keep the final parameters
        if self.best_epoch is None:
            best_params, self.best_epoch = params, config.epochs

        if self.debug:
            print('  *** keep parameters of epoch {}'.format(self.best_epoch))

        return best_params, self.history

    def validate(self, params, X_val, y_val):
        """(mean loss, accuracy) on validation data; NaN for an empty set"""

        if len(X_val) == 0:
            return np.nan, np.nan

        logits = infer_logits(params, X_val, threads=self.config.threads)
        losses, _ = softmax_xent(logits, y_val)

        return float(np.mean(losses)), float(np.mean(np.argmax(logits, axis=1) == y_val))


def train(config, train_data, val_data, spec=None, debug=False):
    """Train a network; returns (params of the best validation epoch, history DataFrame)"""

    return Trainer(config, spec, debug).train(train_data, val_data)
