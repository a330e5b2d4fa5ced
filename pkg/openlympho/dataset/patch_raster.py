"""Raster input (netpbm PGM/PPM) and random patch extraction.

Supported: P2/P5 (grayscale) and P3/P6 (RGB), maxval 255 only. RGB collapses to
Rec. 601 luma, round(0.299 R + 0.587 G + 0.114 B).
"""

# package(s) for data handling
import numpy as np

from openlympho.core import RasterFormatError, ExtractionError, ShapeError
from .patch_defaults import *
from .patch_records import PatchRecord

_magics = {b'P2': (1, False), b'P5': (1, True), b'P3': (3, False), b'P6': (3, True)}
_whitespace = b' \t\r\n\x0b\x0c'


def _next_token(data, pos):
    """return (token, position after it), skipping whitespace and # comments"""

    size = len(data)
    while pos < size:
        if data[pos:pos + 1] in (b'#',):
            end = data.find(b'\n', pos)
            pos = size if end < 0 else end + 1
        elif data[pos] in _whitespace:
            pos += 1
        else:
            break

    start = pos
    while pos < size and data[pos] not in _whitespace and data[pos:pos + 1] != b'#':
        pos += 1

    return data[start:pos], pos


def _header_int(data, pos, what):
    token, pos = _next_token(data, pos)
    if not token:
        raise RasterFormatError('header ends before {}'.format(what))
    if not token.isdigit():
        raise RasterFormatError('header {} is not an integer: {!r}'.format(what, token))

    return int(token), pos


def luma(rgb):
    """Rec. 601 luma of an H x W x 3 array, rounded half up"""

    rgb = np.asarray(rgb, dtype=np.float64)
    value = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]

    return np.clip(np.floor(value + 0.5), 0, 255).astype(np.uint8)


def read_raster(source):
    """Read a PGM/PPM from a path, a binary stream or bytes; returns H x W uint8 intensities"""

    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, 'read'):
        data = source.read()
    else:
        with open(source, 'rb') as stream:
            data = stream.read()

    magic = data[:2]
    if magic not in _magics:
        raise RasterFormatError('unknown magic {!r}, expected P2, P3, P5 or P6'.format(magic))
    channels, binary = _magics[magic]

    pos = 2
    width, pos = _header_int(data, pos, 'width')
    height, pos = _header_int(data, pos, 'height')
    maxval, pos = _header_int(data, pos, 'maxval')
    if width < 1 or height < 1:
        raise RasterFormatError('image size {}x{} is empty'.format(width, height))
    if maxval != 255:
        raise RasterFormatError('maxval must be 255, got {}'.format(maxval))

    needed = width * height * channels
    if binary:
        if pos >= len(data) or data[pos] not in _whitespace:
            raise RasterFormatError('missing whitespace between header and pixel data')
        start = pos + 1
        if len(data) - start < needed:
            raise RasterFormatError('truncated pixel data: expected {} bytes, found {}'.format(needed, len(data) - start))
        values = np.frombuffer(data, dtype=np.uint8, count=needed, offset=start)
    else:
        tokens = []
        while len(tokens) < needed:
            token, pos = _next_token(data, pos)
            if not token:
                raise RasterFormatError('truncated pixel data: expected {} samples, found {}'.format(needed, len(tokens)))
            if not token.isdigit():
                raise RasterFormatError('sample {} is not an integer: {!r}'.format(len(tokens), token))
            tokens.append(int(token))
        values = np.array(tokens, dtype=np.int64)
        if values.max() > maxval:
            raise RasterFormatError('sample value {} exceeds maxval {}'.format(values.max(), maxval))
        values = values.astype(np.uint8)

    if channels == 1:
        return values.reshape(height, width).copy()

    return luma(values.reshape(height, width, 3))


ingest_raster = read_raster


def write_raster(image, sink, binary=True):
    """Write an H x W (PGM) or H x W x 3 (PPM) uint8 array to a path or binary stream"""

    image = np.asarray(image)
    if image.ndim == 2:
        magic = b'P5' if binary else b'P2'
    elif image.ndim == 3 and image.shape[2] == 3:
        magic = b'P6' if binary else b'P3'
    else:
        raise ShapeError('raster must be H x W or H x W x 3, got {}'.format(image.shape))
    if image.min() < 0 or image.max() > 255:
        raise RasterFormatError('raster values must lie in 0-255')

    height, width = image.shape[:2]
    data = magic + '\n{} {}\n255\n'.format(width, height).encode('ascii')
    if binary:
        data += image.astype(np.uint8).tobytes()
    else:
        rows = image.reshape(height, -1)
        data += ''.join(' '.join(str(int(value)) for value in row) + '\n' for row in rows).encode('ascii')

    if hasattr(sink, 'write'):
        sink.write(data)
    else:
        with open(sink, 'wb') as stream:
            stream.write(data)

    return len(data)


def extract_patches(image, n, seed, background_threshold=extract_data['background_threshold'], max_attempts=None):
    """Cut n untagged 40x40 patches at uniformly drawn positions.

    Patches may overlap. With a background_threshold, patches whose mean intensity
    exceeds it are rejected and redrawn, at most max_attempts draws in total
    (default 50 per requested patch)."""

    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeError('expected a grayscale H x W image, got shape {}'.format(image.shape))
    height, width = image.shape
    if height < patch_side or width < patch_side:
        raise ShapeError('image {}x{} is smaller than {}x{}'.format(height, width, patch_side, patch_side))
    if max_attempts is None:
        max_attempts = max(1, n) * extract_data['max_attempts_per_patch']

    rng = np.random.default_rng(seed)
    patches = []
    attempts = 0
    while len(patches) < n:
        if attempts >= max_attempts:
            raise ExtractionError('accepted {} of {} draws ({:.1%} acceptance) before reaching {} patches'.format(
                len(patches), attempts, len(patches) / attempts, n))
        attempts += 1

        top = int(rng.integers(0, height - patch_side + 1))
        left = int(rng.integers(0, width - patch_side + 1))
        patch = image[top:top + patch_side, left:left + patch_side]
        if background_threshold is not None and patch.mean() > background_threshold:
            continue
        patches.append(PatchRecord(None, patch.copy()))

    return patches
