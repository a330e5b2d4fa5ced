
"""Tests for `openlympho` package."""


def _last_line(capsys):
	return capsys.readouterr().out.strip().splitlines()[-1]


def test_cli_01_synth(tmp_path, capsys):
	"""4 cases give 80 records; two runs give identical files; the resolved options are stored"""
	from openlympho.cli import cli

	assert cli(['synth', '--out', str(tmp_path / 'a'), '--cases', '4']) == 0
	assert _last_line(capsys).startswith('synth: 80 records from 4 cases')
	assert cli(['--seed', '0', 'synth', '--out', str(tmp_path / 'b'), '--cases', '4']) == 0

	manifest = (tmp_path / 'a' / 'manifest.tsv').read_text().splitlines()
	assert len(manifest) == 81
	assert (tmp_path / 'a' / 'manifest.tsv').read_bytes() == (tmp_path / 'b' / 'manifest.tsv').read_bytes()
	for name in ['C000_s0_p0.txt', 'C003_s3_p4.txt']:
		assert (tmp_path / 'a' / 'records' / name).read_bytes() == (tmp_path / 'b' / 'records' / name).read_bytes()

	run_config = (tmp_path / 'a' / 'run_config.txt').read_text().splitlines()
	assert run_config[0] == '# openlympho synth'
	assert 'cases=4' in run_config and 'seed=0' in run_config and 'precision=f32' in run_config
	assert run_config[1:] == sorted(run_config[1:])


def test_cli_01_exit_codes(tmp_path, capsys):
	"""Usage errors exit with 2, runtime failures with 1"""
	from openlympho.cli import cli

	assert cli(['synth', '--out', str(tmp_path), '--cases', '5']) == 1
	assert 'multiple of 4' in capsys.readouterr().err
	assert cli(['synth']) == 2
	assert '--out' in capsys.readouterr().err
	assert cli(['fly']) == 2
	assert cli(['train', '--corpus', str(tmp_path)]) == 2
	assert cli(['--precision', 'f16', 'gradcheck']) == 2


def test_cli_01_extract(tmp_path, capsys):
	"""Patches of a PGM become labeled records in the corpus manifest"""
	import numpy as np
	from openlympho.cli import cli
	from openlympho.dataset import read_manifest, load_record

	pixels = np.random.default_rng(0).integers(0, 256, size=(40, 40)).astype(np.uint8)
	(tmp_path / 'slide.pgm').write_bytes(b'P5\n40 40\n255\n' + pixels.tobytes())
	corpus = tmp_path / 'corpus'

	assert cli(['extract', '--image', str(tmp_path / 'slide.pgm'), '--label', '3', '--out', str(corpus)]) == 0
	assert cli(['extract', '--image', str(tmp_path / 'slide.pgm'), '--label', '3', '--out', str(corpus)]) == 0

	manifest = read_manifest(corpus / 'manifest.tsv')
	assert len(manifest) == 10
	assert set(manifest['case_id']) == {'slide'}
	assert sorted(set(manifest['set_index'])) == [0, 1]
	assert set(manifest['label']) == {3}
	record = load_record(corpus / manifest['path'].iloc[0])
	assert record.label == 3
	np.testing.assert_array_equal(record.pixels, pixels)

	capsys.readouterr()
	assert cli(['extract', '--image', str(tmp_path / 'slide.pgm'), '--label', '4', '--out', str(corpus)]) == 2
	assert '--label' in capsys.readouterr().err
	assert cli(['extract', '--image', str(tmp_path / 'missing.pgm'), '--label', '0', '--out', str(corpus)]) == 1


def test_cli_01_split_train_eval_predict(tmp_path, capsys):
	"""A small corpus through split, one epoch of training, evaluation and prediction"""
	import pandas as pd
	from openlympho.cli import cli
	from openlympho.dataset import read_split, split_counts
	from openlympho.evaluator import read_confusion

	corpus, split, model, report = (str(tmp_path / name) for name in ['corpus', 'split', 'model', 'report'])
	assert cli(['synth', '--out', corpus, '--cases', '4']) == 0

	assert cli(['split', '--corpus', corpus, '--out', split]) == 0
	assert _last_line(capsys) == 'split: train=48 val=12 test=20 (4 sets)'
	counts = split_counts(read_split(tmp_path / 'split' / 'split.tsv'))
	assert (counts['train'], counts['val'], counts['test']) == (48, 12, 20)
	assert cli(['split', '--corpus', corpus, '--out', split, '--train', '48']) == 2

	assert cli(['train', '--corpus', corpus, '--split', str(tmp_path / 'split' / 'split.tsv'), '--out', model,
				'--epochs', '1', '--batch-size', '16']) == 0
	assert _last_line(capsys).startswith('train: best_epoch=1')
	history = pd.read_csv(tmp_path / 'model' / 'history.tsv', sep='\t')
	assert list(history['epoch']) == [1]
	assert 'epochs=1' in (tmp_path / 'model' / 'run_config.txt').read_text().splitlines()

	assert cli(['eval', '--model', str(tmp_path / 'model' / 'model.lymf'), '--corpus', corpus,
				'--split', str(tmp_path / 'split' / 'split.tsv'), '--out', report, '--threads', '2']) == 0
	line = _last_line(capsys)
	images = read_confusion(tmp_path / 'report' / 'image_confusion.tsv')
	sets = read_confusion(tmp_path / 'report' / 'set_confusion.tsv')
	assert (images.total, sets.total) == (20, 4)
	assert line == 'image_acc={:.4f} set_acc={:.4f} ({}/20 images, {}/4 sets)'.format(
		images.accuracy, sets.accuracy, images.correct, sets.correct)
	detail = pd.read_csv(tmp_path / 'report' / 'sets_detail.tsv', sep='\t')
	assert len(detail) == 4
	assert set(detail['decided_by']) <= {'majority', 'probability_fallback'}

	assert cli(['predict', '--model', str(tmp_path / 'model' / 'model.lymf'),
				'--record', str(tmp_path / 'corpus' / 'records' / 'C001_s0_p0.txt')]) == 0
	assert _last_line(capsys).startswith('predict: ')


def test_cli_01_gradcheck_and_config(tmp_path, capsys):
	"""PASS exits 0, FAIL exits 1; explicit flags override the config file, which overrides defaults"""
	from openlympho.cli import cli

	assert cli(['gradcheck']) == 0
	assert _last_line(capsys).endswith('PASS')
	assert cli(['gradcheck', '--tolerance', '1e-30']) == 1
	assert _last_line(capsys).endswith('FAIL')

	(tmp_path / 'options.txt').write_text('# strict\ntolerance = 1e-30\n\nepsilon=1e-5  # central differences\n')
	assert cli(['gradcheck', '--config', str(tmp_path / 'options.txt')]) == 1
	assert cli(['gradcheck', '--config', str(tmp_path / 'options.txt'), '--tolerance', '1e-6',
				'--out', str(tmp_path / 'check')]) == 0
	lines = (tmp_path / 'check' / 'run_config.txt').read_text().splitlines()
	assert 'tolerance=1e-06' in lines and 'epsilon=1e-05' in lines
	assert (tmp_path / 'check' / 'gradcheck.tsv').read_text().startswith('block\tsize\tmax_rel_error')

	(tmp_path / 'bad.txt').write_text('tolerence=1\n')
	assert cli(['gradcheck', '--config', str(tmp_path / 'bad.txt')]) == 2


def test_cli_01_pipeline_is_reproducible(tmp_path):
	"""Two single-threaded synth, split, train, eval runs write byte-identical artifacts"""
	from openlympho.cli import cli

	for run in ['a', 'b']:
		root = tmp_path / run
		assert cli(['synth', '--out', str(root / 'corpus'), '--cases', '4', '--seed', '2']) == 0
		assert cli(['split', '--corpus', str(root / 'corpus'), '--out', str(root / 'split'), '--seed', '2']) == 0
		assert cli(['train', '--corpus', str(root / 'corpus'), '--split', str(root / 'split' / 'split.tsv'),
					'--out', str(root / 'model'), '--epochs', '2', '--batch-size', '8', '--seed', '2']) == 0
		assert cli(['eval', '--model', str(root / 'model' / 'model.lymf'), '--corpus', str(root / 'corpus'),
					'--split', str(root / 'split' / 'split.tsv'), '--out', str(root / 'report')]) == 0

	for name in ['corpus/manifest.tsv', 'split/split.tsv', 'model/model.lymf', 'model/history.tsv',
				 'report/image_confusion.tsv', 'report/set_confusion.tsv', 'report/sets_detail.tsv']:
		assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes(), name


def test_cli_01_extract_continues_partial_sets(tmp_path, capsys):
	"""A partial set is reported and completed by the next extract of the same case"""
	import numpy as np
	from openlympho.cli import cli
	from openlympho.dataset import read_manifest, validate_manifest

	pixels = np.random.default_rng(1).integers(0, 256, size=(40, 40)).astype(np.uint8)
	(tmp_path / 'slide.pgm').write_bytes(b'P5\n40 40\n255\n' + pixels.tobytes())
	corpus = tmp_path / 'corpus'
	extract = ['extract', '--image', str(tmp_path / 'slide.pgm'), '--label', '1', '--out', str(corpus), '--n']

	assert cli(extract + ['3']) == 0
	assert 'set 0 of case slide holds 3 of 5 patches' in capsys.readouterr().err
	manifest = read_manifest(corpus / 'manifest.tsv')
	assert list(zip(manifest['set_index'], manifest['patch_index'])) == [(0, 0), (0, 1), (0, 2)]

	assert cli(extract + ['7']) == 0
	captured = capsys.readouterr()
	assert 'note' not in captured.err
	assert captured.out.strip().endswith('(sets 0-1)')
	manifest = read_manifest(corpus / 'manifest.tsv')
	assert len(manifest) == 10
	assert list(manifest.groupby('set_index').size()) == [5, 5]
	validate_manifest(manifest)

	assert cli(extract + ['1']) == 0
	assert 'set 2 of case slide holds 1 of 5 patches' in capsys.readouterr().err


def test_cli_01_extract_background_threshold(tmp_path, capsys):
	"""The background threshold defaults to off and to 240 when the flag is given without a value"""
	import numpy as np
	from openlympho.cli import cli
	from openlympho.dataset import extract_data

	pixels = np.full((40, 40), 250, dtype=np.uint8)
	(tmp_path / 'bright.pgm').write_bytes(b'P5\n40 40\n255\n' + pixels.tobytes())
	corpus = tmp_path / 'corpus'

	assert extract_data['background_threshold'] is None
	assert cli(['extract', '--image', str(tmp_path / 'bright.pgm'), '--label', '0', '--out', str(corpus)]) == 0
	assert 'background_threshold=' in (corpus / 'run_config.txt').read_text().splitlines()

	# mean 250 is background once rejection is on with the default 240
	assert cli(['extract', '--image', str(tmp_path / 'bright.pgm'), '--label', '0', '--out', str(tmp_path / 'other'),
				'--background-threshold']) == 1
	assert 'acceptance' in capsys.readouterr().err

def test_cli_01_train_with_augmentation(tmp_path, capsys):
	"""--augment trains on the records plus five geometric copies of each"""
	from openlympho.cli import cli

	corpus, split = str(tmp_path / 'corpus'), str(tmp_path / 'split')
	assert cli(['synth', '--out', corpus, '--cases', '4']) == 0
	assert cli(['split', '--corpus', corpus, '--out', split]) == 0
	capsys.readouterr()

	assert cli(['--debug', 'train', '--corpus', corpus, '--split', str(tmp_path / 'split' / 'split.tsv'),
				'--out', str(tmp_path / 'model'), '--epochs', '1', '--batch-size', '32', '--augment']) == 0
	out = capsys.readouterr().out
	assert 'on 288 images (12 validation)' in out
	assert 'augment=True' in (tmp_path / 'model' / 'run_config.txt').read_text().splitlines()
