"""Binary model files.

Layout (all integers u32 little-endian, parameters binary32 little-endian):

    magic 'LYMF', version
    parameterized layer count L
    L layers, each: u8 type tag (1 conv, 2 dense)
                    dims, conv: F, C, K, K   dense: out, in
                    kernels/weights (row-major) then bias
    architecture section: magic 'ARCH', input channels, rows, columns
                    per layer: u8 activation (0 identity, 1 tanh, 2 softmax),
                    conv layers add pool window, pool stride (0, 0 without pooling)

The whole file is parsed and checked before any parameter block is built, so a
corrupted file never yields a partly loaded network.
"""

# package(s) for data handling
import io
import struct

import numpy as np

from openlympho.core import *
from .network_defaults import *
from .network_objects import *
from .network_system import ArchitectureSpec, NetworkParams

type_tags = {'conv': 1, 'dense': 2}
activation_codes = {'identity': 0, 'tanh': 1, 'softmax': 2}
dims_count = {type_tags['conv']: 4, type_tags['dense']: 2}


def _descriptors(spec):
    """(tag, activation, dims, pool) per parameterized layer, validating the layer order"""

    descriptors = []
    elements = spec.elements
    number = 0
    while number < len(elements):
        layer = elements[number]
        shape = spec.shapes[number]
        if isinstance(layer, ConvLayer):
            pool = (0, 0)
            if number + 1 < len(elements) and isinstance(elements[number + 1], PoolLayer):
                pool = (elements[number + 1].window, elements[number + 1].stride)
                number += 1
            descriptors.append((type_tags['conv'], activation_codes[layer.activation],
                                tuple(layer.param_shapes(shape)[0]), pool))
        elif isinstance(layer, DenseLayer):
            descriptors.append((type_tags['dense'], activation_codes[layer.activation],
                                tuple(layer.param_shapes(shape)[0]), None))
        elif isinstance(layer, FlattenLayer):
            if not isinstance(elements[number + 1], DenseLayer) or len(shape) != 3:
                raise ModelFileError('flatten is only storable between spatial layers and a dense layer')
        else:
            raise ModelFileError('layer {}: pooling is only storable directly after a conv layer'.format(layer.name))
        number += 1

    return descriptors


def save_model(params, spec, sink):
    """Write params (architecture spec, or params.spec when None) to a path or binary stream"""

    spec = params.spec if spec is None else spec
    if spec.describe() != params.spec.describe():
        raise ShapeError('parameters were built for a different architecture')

    descriptors = _descriptors(spec)
    stream = io.BytesIO()
    stream.write(model_file_data['magic'])
    stream.write(struct.pack('<2I', model_file_data['version'], len(descriptors)))
    for (tag, activation, dims, pool), block in zip(descriptors, params.blocks):
        stream.write(struct.pack('<B{}I'.format(len(dims)), tag, *dims))
        for array in block.arrays():
            stream.write(np.ascontiguousarray(array, dtype='<f4').tobytes())

    stream.write(model_file_data['architecture_magic'])
    stream.write(struct.pack('<3I', *spec.input_shape))
    for tag, activation, dims, pool in descriptors:
        stream.write(struct.pack('<B', activation))
        if pool is not None:
            stream.write(struct.pack('<2I', *pool))

    payload = stream.getvalue()
    if isinstance(sink, (str, bytes)) or hasattr(sink, '__fspath__'):
        with open(sink, 'wb') as target:
            target.write(payload)
    else:
        sink.write(payload)

    return len(payload)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, fmt, what):
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise ModelFileError('truncated file: {} needs {} bytes at offset {}, file holds {}'.format(
                what, size, self.offset, len(self.data)))
        values = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return values

    def floats(self, count, what):
        if self.offset + 4 * count > len(self.data):
            raise ModelFileError('truncated file: {} needs {} bytes at offset {}, file holds {}'.format(
                what, 4 * count, self.offset, len(self.data)))
        values = np.frombuffer(self.data, dtype='<f4', count=count, offset=self.offset).astype(np.float32)
        self.offset += 4 * count
        return values


def _rebuild(shape, layers):
    names = {value: key for key, value in activation_codes.items()}
    elements = []
    convs, denses, pools = 0, 0, 0
    # flatten is implicit before the first dense layer
    for tag, dims, activation, pool in layers:
        if tag == type_tags['conv']:
            features, channels, side, side_w = dims
            if side != side_w:
                raise ModelFileError('conv {}: non-square kernel {}x{}'.format(convs + 1, side, side_w))
            convs += 1
            elements.append(ConvLayer(name='conv{}'.format(convs), features=features, kernel_side=side,
                                      activation=names[activation]))
            if pool[0]:
                pools += 1
                elements.append(PoolLayer(name='pool{}'.format(pools), window=pool[0], stride=pool[1]))
        else:
            if denses == 0:
                elements.append(FlattenLayer(name='flatten'))
            denses += 1
            elements.append(DenseLayer(name='dense{}'.format(denses), units=dims[0], activation=names[activation]))

    spec = ArchitectureSpec(shape, elements)
    if spec.describe() == ArchitectureSpec.default().describe():
        spec = ArchitectureSpec.default()

    return spec


def load_model(source):
    """Read a model file (path, binary stream or bytes); returns (params, spec) in float32"""

    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str) or hasattr(source, '__fspath__'):
        with open(source, 'rb') as stream:
            data = stream.read()
    else:
        data = source.read()

    reader = _Reader(data)
    magic = bytes(reader.take('<4s', 'magic')[0])
    if magic != model_file_data['magic']:
        raise ModelFileError('bad magic {!r}, expected {!r}'.format(magic, model_file_data['magic']))
    version, = reader.take('<I', 'version')
    if version != model_file_data['version']:
        raise ModelFileError('unsupported model file version {}'.format(version))
    count, = reader.take('<I', 'layer count')
    if count < 1 or count > model_file_data['max_layers']:
        raise ModelFileError('implausible layer count {}'.format(count))

    stored = []
    for number in range(1, count + 1):
        tag, = reader.take('<B', 'layer {} tag'.format(number))
        if tag not in dims_count:
            raise ModelFileError('layer {}: unknown type tag {}'.format(number, tag))
        dims = reader.take('<{}I'.format(dims_count[tag]), 'layer {} dims'.format(number))
        size = 1
        for dim in dims:
            size *= dim
        weights = reader.floats(size, 'layer {} weights'.format(number)).reshape(dims)
        bias = reader.floats(dims[0], 'layer {} bias'.format(number))
        stored.append((tag, dims, weights, bias))

    architecture, = reader.take('<4s', 'architecture section')
    if architecture != model_file_data['architecture_magic']:
        raise ModelFileError('expected the architecture section after {} layers at offset {}'.format(
            count, reader.offset - 4))
    shape = reader.take('<3I', 'input shape')
    layers = []
    for number, (tag, dims, _, _) in enumerate(stored, start=1):
        activation, = reader.take('<B', 'layer {} activation'.format(number))
        if activation not in activation_codes.values():
            raise ModelFileError('layer {}: unknown activation code {}'.format(number, activation))
        pool = reader.take('<2I', 'layer {} pooling'.format(number)) if tag == type_tags['conv'] else None
        layers.append((tag, dims, activation, pool))
    if reader.offset != len(data):
        raise ModelFileError('{} unexpected bytes after the architecture section'.format(len(data) - reader.offset))

    try:
        spec = _rebuild(shape, layers)
        for (tag, dims, _, _), shapes in zip(stored, spec.param_shapes()):
            if tuple(dims) != tuple(shapes[0]):
                raise ShapeError('stored shape {} disagrees with the architecture {}'.format(tuple(dims), shapes[0]))
    except (ShapeError, AssertionError) as error:
        raise ModelFileError('file does not describe a valid network: {}'.format(error)) from None

    blocks = []
    for number, (tag, dims, weights, bias) in zip(spec.parameterized(), stored):
        layer = spec.elements[number]
        blocks.append(ConvLayerParams(weights, bias) if isinstance(layer, ConvLayer) else DenseLayerParams(weights, bias))

    return NetworkParams(spec, blocks), spec
