
"""Tests for `openlympho` package."""


def test_model_02_toy_network_passes():
	"""Every block and the input agree with central differences to 1e-6 (binary64, epsilon 1e-5)"""
	from openlympho.model import grad_check

	report = grad_check(seed=0, epsilon=1e-5, tolerance=1e-6)

	assert list(report.table['block']) == ['conv.kernels', 'conv.bias', 'dense1.weights', 'dense1.bias',
										   'dense2.weights', 'dense2.bias', 'input']
	assert list(report.table['size']) == [18, 2, 400, 8, 32, 4, 144]
	assert report.passed, report.table
	assert report.max_error < 1e-6
	assert report.worst.empty
	report.assert_passed()


def test_model_02_frozen_blocks_have_zero_error():
	"""With zero output weights the loss ignores everything upstream: those errors are exactly 0"""
	import numpy as np
	from openlympho.model import ArchitectureSpec, build_network, grad_check

	params = build_network(ArchitectureSpec.toy(), seed=1, dtype=np.float64)
	params.blocks[-1].weights[...] = 0

	report = grad_check(params=params, seed=1)
	errors = dict(zip(report.table['block'], report.table['max_rel_error']))

	for block in ['conv.kernels', 'conv.bias', 'dense1.weights', 'dense1.bias', 'input']:
		assert errors[block] == 0.0
	assert report.passed


def test_model_02_corrupted_backward_fails():
	"""A sign flip in the backward pass is caught and reported"""
	import pytest
	from openlympho.core import GradientCheckError
	from openlympho.model import backward, grad_check

	def flipped(params, cache, grad_logits):
		grads, grad_input = backward(params, cache, grad_logits)
		grads[0].kernels = -grads[0].kernels
		return grads, grad_input

	report = grad_check(seed=0, backward=flipped)

	assert not report.passed
	assert list(report.worst['block']) == ['conv.kernels']
	with pytest.raises(GradientCheckError, match='conv.kernels'):
		report.assert_passed()


def test_model_02_zero_learning_rate_step():
	"""A step with learning rate 0 leaves every parameter bit-identical"""
	import numpy as np
	from openlympho.model import ArchitectureSpec, build_network, loss_and_gradients, sgd_step

	params = build_network(ArchitectureSpec.toy(), seed=2)
	before = params.copy()
	velocity = params.zeros_like()
	rng = np.random.default_rng(2)
	X = rng.uniform(-1, 1, size=(5, 1, 12, 12)).astype(np.float32)

	_, grads, _ = loss_and_gradients(params, X, rng.integers(0, 4, size=5))
	sgd_step(params, grads, velocity, 0.0, 0.9)

	for a, b in zip(params.arrays(), before.arrays()):
		assert a.tobytes() == b.tobytes()


def test_model_02_full_batch_step_follows_the_numeric_gradient():
	"""Momentum 0 and a full batch: one step equals p - lr * (finite-difference gradient of the mean loss)"""
	import numpy as np
	from openlympho.core import softmax_xent
	from openlympho.model import ArchitectureSpec, build_network, forward, loss_and_gradients, sgd_step

	params = build_network(ArchitectureSpec.toy(), seed=3, dtype=np.float64)
	rng = np.random.default_rng(3)
	X = rng.uniform(-1, 1, size=(6, 1, 12, 12))
	y = np.array([0, 1, 2, 3, 1, 2])
	reference = params.copy()

	def mean_loss():
		logits, _ = forward(reference, X)
		return float(np.mean(softmax_xent(logits, y)[0]))

	expected = []
	for array in reference.arrays():
		numeric = np.zeros(array.shape)
		for index in np.ndindex(array.shape):
			original = array[index]
			array[index] = original + 1e-5
			upper = mean_loss()
			array[index] = original - 1e-5
			lower = mean_loss()
			array[index] = original
			numeric[index] = (upper - lower) / 2e-5
		expected.append(array - 0.1 * numeric)

	_, grads, _ = loss_and_gradients(params, X, y)
	sgd_step(params, grads, params.zeros_like(), 0.1, 0.0)

	for stepped, target in zip(params.arrays(), expected):
		np.testing.assert_allclose(stepped, target, rtol=0, atol=1e-9)
