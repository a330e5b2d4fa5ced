"""Gradient checking: analytic backward pass against central finite differences."""

# package(s) for data handling
import numpy as np
import pandas as pd

from openlympho.core import *
from .network_defaults import gradcheck_data
from .network_system import ArchitectureSpec, build_network, forward, backward

report_columns = ['block', 'size', 'max_rel_error', 'worst_index', 'analytic', 'numeric']


class GradCheckReport:
    """Per-block comparison of analytic and numeric gradients

    table: DataFrame with one row per parameter block plus the input
    tolerance: the check passes when every max_rel_error is below it"""

    def __init__(self, table, tolerance):
        self.table = table
        self.tolerance = tolerance

    @property
    def max_error(self):
        return float(self.table['max_rel_error'].max())

    @property
    def passed(self):
        return bool(self.max_error < self.tolerance)

    @property
    def worst(self):
        """rows of the blocks that fail the tolerance"""

        return self.table[self.table['max_rel_error'] >= self.tolerance]

    def assert_passed(self):
        if not self.passed:
            lines = ['{} at {}: analytic {:.6e}, numeric {:.6e}, relative error {:.3e}'.format(
                row.block, row.worst_index, row.analytic, row.numeric, row.max_rel_error)
                for row in self.worst.itertuples()]
            raise GradientCheckError('gradient check failed (tolerance {:g}):\n  {}'.format(self.tolerance, '\n  '.join(lines)))

        return self

    def __repr__(self):
        return 'GradCheckReport(passed={}, max_error={:.3e})'.format(self.passed, self.max_error)


def _numeric_gradient(loss, array, epsilon):
    """central differences of loss() w.r.t. every coordinate of array (perturbed in place)"""

    numeric = np.zeros(array.shape, dtype=np.float64)
    for index in np.ndindex(array.shape):
        original = array[index]
        array[index] = original + epsilon
        upper = loss()
        array[index] = original - epsilon
        lower = loss()
        array[index] = original
        numeric[index] = (upper - lower) / (2 * epsilon)

    return numeric


def grad_check(spec=None, seed=gradcheck_data['seed'], epsilon=gradcheck_data['epsilon'],
               tolerance=gradcheck_data['tolerance'], backward=backward, params=None, sample=None, label=None,
               debug=False):
    """Compare the analytic gradient of one sample's loss with central differences.

    Runs in float64 on the toy network unless spec or params say otherwise. A
    random input and label are drawn from seed when not given. backward can be
    replaced to check an alternative (or deliberately broken) implementation.
    returns a GradCheckReport"""

    if params is None:
        spec = ArchitectureSpec.toy() if spec is None else spec
        params = build_network(spec, seed=seed, dtype=np.float64)
    else:
        params = params.astype(np.float64)
    spec = params.spec

    rng = np.random.default_rng([seed, 2])
    x = rng.uniform(-1, 1, size=(1,) + spec.input_shape) if sample is None else np.array(sample, dtype=np.float64)
    x = x.reshape((1,) + spec.input_shape)
    label = int(rng.integers(spec.classes)) if label is None else int(label)
    labels = np.array([label])

    def loss():
        logits, _ = forward(params, x)
        return float(softmax_xent(logits, labels)[0][0])

    logits, cache = forward(params, x)
    _, grad_logits = softmax_xent(logits, labels)
    grads, grad_input = backward(params, cache, grad_logits)

    analytic = [array for block in grads for array in block.arrays()] + [grad_input]
    targets = [array for _, array in params.named_arrays()] + [x]
    names = [name for name, _ in params.named_arrays()] + ['input']

    rows = []
    for name, target, exact in zip(names, targets, analytic):
        numeric = _numeric_gradient(loss, target, epsilon)
        errors = relative_error(exact, numeric, gradcheck_data['floor'])
        worst = np.unravel_index(np.argmax(errors), errors.shape)
        rows.append([name, target.size, float(errors[worst]), tuple(int(i) for i in worst),
                     float(np.asarray(exact)[worst]), float(numeric[worst])])
        if debug:
            print('  *** {:16s} size {:6d}  max relative error {:.3e}'.format(name, target.size, rows[-1][2]))

    return GradCheckReport(pd.DataFrame(rows, columns=report_columns), tolerance)
