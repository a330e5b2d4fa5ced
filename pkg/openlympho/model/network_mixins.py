"""Basic properties mixins:

- identifiable_properties_mixin
- shape_properties_mixin
- conv_properties_mixin
- pool_properties_mixin
- flatten_properties_mixin
- dense_properties_mixin
- train_properties_mixin

"""

import numpy as np

from openlympho.core import ShapeError

activations = ['identity', 'tanh', 'softmax']


class identifiable_properties_mixin(object):
    """Something that has a name

    name: a name"""

    def __init__(self, name=None, *args, **kwargs):
        super().__init__(*args, **kwargs)
        """Initialization"""
        self.name = name


class shape_properties_mixin(object):
    """Something with an expected output shape

    output_shape: pinned per-sample output shape, None leaves it unchecked"""

    def __init__(self, output_shape=None, *args, **kwargs):
        super().__init__(*args, **kwargs)
        """Initialization"""
        self.output_shape = None if output_shape is None else tuple(output_shape)

    def check_output(self, shape):
        if self.output_shape is not None and tuple(shape) != self.output_shape:
            raise ShapeError('layer {} produces {}, expected {}'.format(self.name, tuple(shape), self.output_shape))


class conv_properties_mixin(object):
    def __init__(self, features, kernel_side, activation='tanh', *args, **kwargs):
        super().__init__(*args, **kwargs)
        "initialize"
        self.features = features
        self.kernel_side = kernel_side
        self.activation = activation

        np.testing.assert_array_less(0, [features, kernel_side], 'error: features and kernel_side must be >= 1')
        np.testing.assert_equal(activation in activations, True, 'error: unknown activation {}'.format(activation))

    def infer_shape(self, shape):
        if len(shape) != 3:
            raise ShapeError('layer {} needs a [C, H, W] input, got {}'.format(self.name, shape))
        channels, height, width = shape
        if height < self.kernel_side or width < self.kernel_side:
            raise ShapeError('layer {}: input {}x{} is smaller than the {}x{} kernel'.format(
                self.name, height, width, self.kernel_side, self.kernel_side))
        return (self.features, height - self.kernel_side + 1, width - self.kernel_side + 1)

    def param_shapes(self, shape):
        return [(self.features, shape[0], self.kernel_side, self.kernel_side), (self.features,)]


class pool_properties_mixin(object):
    def __init__(self, window, stride, *args, **kwargs):
        super().__init__(*args, **kwargs)
        "initialize"
        self.window = window
        self.stride = stride

        np.testing.assert_array_less(0, [window, stride], 'error: window and stride must be >= 1')

    def infer_shape(self, shape):
        if len(shape) != 3:
            raise ShapeError('layer {} needs a [C, H, W] input, got {}'.format(self.name, shape))
        channels, height, width = shape
        if height < self.window or width < self.window:
            raise ShapeError('layer {}: window {} is larger than the {}x{} input'.format(
                self.name, self.window, height, width))
        return (channels, (height - self.window) // self.stride + 1, (width - self.window) // self.stride + 1)


class flatten_properties_mixin(object):
    def infer_shape(self, shape):
        return (int(np.prod(shape)),)


class dense_properties_mixin(object):
    def __init__(self, units, activation='tanh', *args, **kwargs):
        super().__init__(*args, **kwargs)
        "initialize"
        self.units = units
        self.activation = activation

        np.testing.assert_array_less(0, units, 'error: units must be >= 1')
        np.testing.assert_equal(activation in activations, True, 'error: unknown activation {}'.format(activation))

    def infer_shape(self, shape):
        if len(shape) != 1:
            raise ShapeError('layer {} needs a flat input, got {} (add a flatten layer)'.format(self.name, shape))
        return (self.units,)

    def param_shapes(self, shape):
        return [(self.units, shape[0]), (self.units,)]


class train_properties_mixin(object):
    """Hyper-parameters of minibatch SGD with momentum"""

    def __init__(self, learning_rate, momentum, batch_size, epochs, seed, lr_decay_factor, lr_decay_every,
                 precision='f32', threads=1, augment=False, *args, **kwargs):
        super().__init__(*args, **kwargs)
        "initialize"
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.lr_decay_factor = lr_decay_factor
        self.lr_decay_every = lr_decay_every
        self.precision = precision
        self.threads = threads
        self.augment = augment

        # input testing
        np.testing.assert_array_less(0, self.learning_rate, 'error: learning_rate must be > 0')
        np.testing.assert_array_less(0, [self.batch_size, self.epochs, self.lr_decay_every, self.threads],
                                     'error: batch_size, epochs, lr_decay_every and threads must be >= 1')
        np.testing.assert_equal(0 <= self.momentum < 1, True, 'error: momentum must lie in [0, 1)')
        np.testing.assert_equal(0 < self.lr_decay_factor <= 1, True, 'error: lr_decay_factor must lie in (0, 1]')
        np.testing.assert_equal(self.precision in ('f32', 'f64'), True, 'error: precision must be f32 or f64')

    def learning_rate_at(self, epoch):
        """step decay, epoch counted from 0"""
        return self.learning_rate * self.lr_decay_factor ** (epoch // self.lr_decay_every)
