# package(s) for data handling
import numpy as np


# *** Exceptions
class ShapeError(ValueError):
    """Tensor or architecture shapes do not compose"""


class RecordFormatError(ValueError):
    """A patch record is malformed; the message names the offending entry index"""


class RasterFormatError(ValueError):
    """A PGM/PPM stream has a malformed header or payload"""


class ExtractionError(RuntimeError):
    """Random patch extraction ran out of retries"""


class SplitError(ValueError):
    """The manifest is malformed or the requested split counts are infeasible"""


class ModelFileError(ValueError):
    """A model file cannot be loaded (magic, version, truncation or shape disagreement)"""


class DivergenceError(FloatingPointError):
    """Training produced a non-finite loss"""


class VotingError(ValueError):
    """A set-group handed to majority voting is incomplete or mixed"""


class GradientCheckError(AssertionError):
    """Analytic gradients disagree with central finite differences"""


# *** General functions
def find_layers(spec, obj):
    """return layers of type obj part of spec.elements"""

    list_of_layers = []
    if spec.elements != []:
        for layer in spec.elements:
            if isinstance(layer, obj):
                list_of_layers.append(layer)

    return list_of_layers


def relative_error(a, b, floor=1e-3):
    """Element-wise |a - b| / max(|a|, |b|, floor).

    The floor keeps coordinates whose true value is (nearly) zero from turning
    round-off noise into a huge relative error."""

    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)

    return np.abs(a - b) / scale


def resolve_dtype(precision):
    """Map a precision name ('f32', 'binary32', 'f64', 'binary64') onto a numpy dtype"""

    if precision in ('f32', 'binary32', 'float32', np.float32):
        return np.float32
    if precision in ('f64', 'binary64', 'float64', np.float64):
        return np.float64

    raise ValueError('unknown precision {!r}, expected f32 or f64'.format(precision))
