
"""Tests for `openlympho` package."""


def test_dataset_03_generate_is_deterministic():
	"""Same (label, seed) gives the same record; a different seed a different one"""
	import pytest
	from openlympho.dataset import synth_generate

	for label in range(4):
		record = synth_generate(label, 11)
		assert record.label == label
		assert record == synth_generate(label, 11)
		assert record != synth_generate(label, 12)
		assert record == synth_generate(label, (11,))

	with pytest.raises(ValueError):
		synth_generate(4, 0)
	with pytest.raises(ValueError):
		synth_generate(-1, 0)


def test_dataset_03_classes_are_separated_but_not_trivial():
	"""Class means differ by at least 5 gray levels; a centroid classifier on (mean, variance) beats 60%"""
	import numpy as np
	from openlympho.dataset import synth_generate

	def features(label, seeds):
		pixels = np.stack([synth_generate(label, seed).pixels.astype(np.float64) for seed in seeds])
		return np.stack([pixels.mean(axis=(1, 2)), pixels.var(axis=(1, 2))], axis=1)

	train = [features(label, range(1000)) for label in range(4)]
	means = [block[:, 0].mean() for block in train]
	for a in range(4):
		for b in range(a + 1, 4):
			assert abs(means[a] - means[b]) >= 5

	pooled = np.concatenate(train)
	center, scale = pooled.mean(axis=0), pooled.std(axis=0)
	centroids = np.stack([((block - center) / scale).mean(axis=0) for block in train])

	correct = 0
	for label in range(4):
		holdout = (features(label, range(5000, 5100)) - center) / scale
		nearest = np.argmin(((holdout[:, None, :] - centroids[None]) ** 2).sum(axis=2), axis=1)
		correct += int(np.sum(nearest == label))

	assert correct / 400 >= 0.6


def test_dataset_03_corpus(tmp_path):
	"""4 cases give 80 records, balanced, named by case/set/patch; same seed, same bytes"""
	import pytest
	from openlympho.dataset import synth_corpus, read_manifest, validate_manifest, load_manifest_records

	manifest = synth_corpus(tmp_path / 'a', cases=4, seed=5)

	assert len(manifest) == 80
	assert list(manifest['label'].value_counts().sort_index()) == [20, 20, 20, 20]
	assert manifest['path'].iloc[0] == 'records/C000_s0_p0.txt'
	assert list(manifest.drop_duplicates('case_id')['label']) == [0, 1, 2, 3]
	validate_manifest(read_manifest(tmp_path / 'a' / 'manifest.tsv'))
	assert len(load_manifest_records(manifest, tmp_path / 'a')) == 80

	synth_corpus(tmp_path / 'b', cases=4, seed=5)
	for name in ['manifest.tsv', 'records/C002_s3_p4.txt']:
		assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

	with pytest.raises(ValueError):
		synth_corpus(tmp_path / 'c', cases=5)
