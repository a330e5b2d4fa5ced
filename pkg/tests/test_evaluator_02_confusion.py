
"""Tests for `openlympho` package."""


def _image_pairs():
	"""240 test images, 60 per observed class, 12 misclassified"""

	pairs = []
	pairs += [(0, 0)] * 56 + [(2, 0)] * 4
	pairs += [(1, 1)] * 60
	pairs += [(2, 2)] * 60
	pairs += [(3, 3)] * 52 + [(0, 3)] * 4 + [(1, 3)] * 4

	return pairs


def test_evaluator_02_image_matrix():
	"""228 of 240 images correct, every observed column sums to 60"""
	import numpy as np
	from openlympho.evaluator import confusion

	matrix = confusion(_image_pairs())

	assert (matrix.correct, matrix.total) == (228, 240)
	assert matrix.accuracy == 0.95
	np.testing.assert_array_equal(matrix.counts.sum(axis=0), [60, 60, 60, 60])
	np.testing.assert_array_equal(np.diag(matrix.counts), [56, 60, 60, 52])
	assert matrix.counts[0, 3] == 4 and matrix.counts[1, 3] == 4 and matrix.counts[2, 0] == 4


def test_evaluator_02_set_matrix():
	"""48 of 48 sets correct"""
	from openlympho.evaluator import confusion

	matrix = confusion([(label, label) for label in range(4) for _ in range(12)])

	assert (matrix.correct, matrix.total, matrix.accuracy) == (48, 48, 1.0)
	assert list(matrix.to_frame().sum(axis=1)) == [12, 12, 12, 12]


def test_evaluator_02_empty_and_invalid():
	"""No samples: accuracy NaN and flagged; class indices outside 0-3 are rejected"""
	import numpy as np
	import pytest
	from openlympho.evaluator import ConfusionMatrix, confusion

	empty = confusion([])
	assert empty.no_samples
	assert np.isnan(empty.accuracy)
	assert empty.total == 0

	with pytest.raises(ValueError):
		confusion([(4, 0)])
	with pytest.raises(ValueError):
		confusion([(0, -1)])
	with pytest.raises(ValueError):
		ConfusionMatrix([[1, 2], [3, 4]])


def test_evaluator_02_discordance():
	"""Every misclassified cell is spelled out as observed -> predicted"""
	from openlympho.evaluator import confusion, discordance

	assert discordance(confusion(_image_pairs())) == ['4 Benign images were predicted as BL',
													  '4 SLL images were predicted as Benign',
													  '4 SLL images were predicted as DLBCL']
	assert discordance(confusion([(1, 2)])) == ['1 BL image was predicted as DLBCL']
	assert discordance(confusion([(0, 0)])) == []


def test_evaluator_02_report_files(tmp_path):
	"""Confusion TSVs label rows and columns with the diagnoses and read back to the same counts"""
	import numpy as np
	import pandas as pd
	from openlympho.evaluator import confusion, write_report, read_confusion, detail_columns

	image_matrix = confusion(_image_pairs())
	set_matrix = confusion([(label, label) for label in range(4) for _ in range(12)])
	detail = pd.DataFrame([['C000', 0, '0,0,0,0,1', 'majority', 0, 0]], columns=detail_columns)

	write_report(tmp_path / 'out', image_matrix, set_matrix, detail)

	lines = (tmp_path / 'out' / 'image_confusion.tsv').read_text().splitlines()
	assert lines[0] == 'predicted\tBenign\tDLBCL\tBL\tSLL'
	assert lines[1] == 'Benign\t56\t0\t0\t4'
	np.testing.assert_array_equal(read_confusion(tmp_path / 'out' / 'image_confusion.tsv').counts, image_matrix.counts)
	np.testing.assert_array_equal(read_confusion(tmp_path / 'out' / 'set_confusion.tsv').counts, set_matrix.counts)
	assert (tmp_path / 'out' / 'sets_detail.tsv').read_text().splitlines()[1] == 'C000\t0\t0,0,0,0,1\tmajority\t0\t0'
