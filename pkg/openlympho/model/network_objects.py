"""Main generic object classes:

- 1. ConvLayer
- 2. PoolLayer
- 3. FlattenLayer
- 4. DenseLayer
- 5. TrainConfig
"""

from .network_mixins import *

# The convolutional layer (valid mode, square kernels)
ConvLayer = type('ConvLayer', (identifiable_properties_mixin,  # Give it a name
                               conv_properties_mixin,  # Give it feature maps, kernel side and activation
                               shape_properties_mixin),  # Give it a pinned output shape
                 {})

# The max pooling layer (floor mode)
PoolLayer = type('PoolLayer', (identifiable_properties_mixin,
                               pool_properties_mixin,
                               shape_properties_mixin),
                 {})

# The flatten layer
FlattenLayer = type('FlattenLayer', (identifiable_properties_mixin,
                                     flatten_properties_mixin,
                                     shape_properties_mixin),
                    {})

# The fully connected layer
DenseLayer = type('DenseLayer', (identifiable_properties_mixin,
                                 dense_properties_mixin,
                                 shape_properties_mixin),
                  {})

# The training configuration
TrainConfig = type('TrainConfig', (train_properties_mixin,),
                   {})

layer_classes = {'conv': ConvLayer,
                 'pool': PoolLayer,
                 'flatten': FlattenLayer,
                 'dense': DenseLayer}
