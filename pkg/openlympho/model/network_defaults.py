"""
Default inputs for the network:
- 1. Patch network layers (conv -> pool -> conv -> pool -> flatten -> dense -> dense)
- 2. Toy network for gradient checking
- 3. Training configuration
- 4. Model file
"""

# *** Default inputs: patch network ***
# output_shape pins the expected chain 40 -> 36 -> 12 -> 8 -> 2; layers built from these dicts
# reject any input that does not reproduce it

input_shape = (1, 40, 40)  # channels, rows, columns

conv1_data = {"name": 'conv1',
              "features": 20,  # feature maps
              "kernel_side": 5,
              "activation": 'tanh',
              "output_shape": (20, 36, 36)}

pool1_data = {"name": 'pool1',
              "window": 3,
              "stride": 3,
              "output_shape": (20, 12, 12)}

conv2_data = {"name": 'conv2',
              "features": 50,
              "kernel_side": 5,
              "activation": 'tanh',
              "output_shape": (50, 8, 8)}

pool2_data = {"name": 'pool2',
              "window": 3,
              "stride": 3,
              "output_shape": (50, 2, 2)}  # floor mode: the last 2 rows/columns are dropped

flatten_data = {"name": 'flatten',
                "output_shape": (200,)}

dense1_data = {"name": 'dense1',
               "units": 500,  # hidden nodes
               "activation": 'tanh',
               "output_shape": (500,)}

dense2_data = {"name": 'dense2',
               "units": 4,  # one per diagnostic class
               "activation": 'softmax',
               "output_shape": (4,)}

default_architecture = [('conv', conv1_data),
                        ('pool', pool1_data),
                        ('conv', conv2_data),
                        ('pool', pool2_data),
                        ('flatten', flatten_data),
                        ('dense', dense1_data),
                        ('dense', dense2_data)]

# *** Default inputs: toy network (finite differences stay cheap) ***

toy_input_shape = (1, 12, 12)

toy_architecture = [('conv', {"name": 'conv', "features": 2, "kernel_side": 3, "activation": 'tanh'}),
                    ('pool', {"name": 'pool', "window": 2, "stride": 2}),
                    ('flatten', {"name": 'flatten'}),
                    ('dense', {"name": 'dense1', "units": 8, "activation": 'tanh'}),
                    ('dense', {"name": 'dense2', "units": 4, "activation": 'softmax'})]

gradcheck_data = {"epsilon": 1e-5,
                  "tolerance": 1e-6,
                  "floor": 1e-3,  # denominator floor of the relative error
                  "seed": 0}

# *** Default inputs: training ***
# conservative defaults; none of these values is known for the original study

train_config_data = {"learning_rate": 0.01,
                     "momentum": 0.9,
                     "batch_size": 32,
                     "epochs": 30,
                     "seed": 0,
                     "lr_decay_factor": 0.5,
                     "lr_decay_every": 10,  # epochs
                     "precision": 'f32',
                     "threads": 1,  # evaluation workers; never changes results
                     "augment": False}

inference_batch_size = 64  # fixed chunking keeps threaded inference bit-identical

# *** Default inputs: model file ***

model_file_data = {"magic": b'LYMF',
                   "version": 1,
                   "max_layers": 64,
                   "architecture_magic": b'ARCH'}  # opens the section after the last layer
