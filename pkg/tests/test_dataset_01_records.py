
"""Tests for `openlympho` package."""


def test_dataset_01_text_form():
	"""1601 comma-separated integers, label first, newline terminated"""
	import numpy as np
	from openlympho.dataset import PatchRecord, format_record

	pixels = np.arange(1600).reshape(40, 40) % 256
	line = format_record(PatchRecord(2, pixels))

	tokens = line.rstrip('\n').split(',')
	assert line.endswith('\n') and line.count('\n') == 1
	assert len(tokens) == 1601
	assert tokens[0] == '2'
	assert tokens[1:4] == ['0', '1', '2']
	assert ' ' not in line


def test_dataset_01_round_trip_is_byte_exact():
	"""write then read returns the record; writing the result again gives the same bytes"""
	import io
	import numpy as np
	from openlympho.dataset import PatchRecord, write_record, read_record

	for record in [PatchRecord(0, np.zeros((40, 40), dtype=np.uint8)),
				   PatchRecord(3, np.random.default_rng(0).integers(0, 256, size=(40, 40)))]:
		sink = io.BytesIO()
		written = write_record(record, sink)
		assert written == len(sink.getvalue())

		again = read_record(io.BytesIO(sink.getvalue()))
		assert again == record

		second = io.StringIO()
		write_record(again, second)
		assert second.getvalue().encode('ascii') == sink.getvalue()


def test_dataset_01_parse_errors_name_the_entry():
	"""Entry count, non-integer tokens, label and intensity ranges"""
	import pytest
	from openlympho.core import RecordFormatError
	from openlympho.dataset import parse_record

	good = ['1'] + ['10'] * 1600

	with pytest.raises(RecordFormatError, match='expected 1601 entries, found 1600'):
		parse_record(','.join(good[:-1]))

	tokens = list(good)
	tokens[7] = '1.5'
	with pytest.raises(RecordFormatError, match='entry 8: non-integer'):
		parse_record(','.join(tokens))

	tokens = list(good)
	tokens[0] = '4'
	with pytest.raises(RecordFormatError, match='entry 1: label 4'):
		parse_record(','.join(tokens))

	tokens = list(good)
	tokens[100] = '256'
	with pytest.raises(RecordFormatError, match='entry 101: intensity 256'):
		parse_record(','.join(tokens))

	tokens = list(good)
	tokens[5] = '-3'
	with pytest.raises(RecordFormatError, match='entry 6'):
		parse_record(','.join(tokens))


def test_dataset_01_binary_form():
	"""1 label byte followed by 1600 intensity bytes"""
	import io
	import numpy as np
	import pytest
	from openlympho.core import RecordFormatError
	from openlympho.dataset import PatchRecord, write_record_binary, read_record_binary

	record = PatchRecord(1, np.random.default_rng(1).integers(0, 256, size=(40, 40)))
	sink = io.BytesIO()

	assert write_record_binary(record, sink) == 1601
	assert sink.getvalue()[0] == 1
	assert read_record_binary(io.BytesIO(sink.getvalue())) == record

	with pytest.raises(RecordFormatError):
		read_record_binary(sink.getvalue()[:-1])
	with pytest.raises(RecordFormatError):
		read_record_binary(bytes([7]) + sink.getvalue()[1:])


def test_dataset_01_record_files(tmp_path):
	"""One record per file, many records per file, and the manifest table"""
	import numpy as np
	import pandas as pd
	import pytest
	from openlympho.core import SplitError
	from openlympho.dataset import (PatchRecord, save_record, load_record, write_records, read_records,
									write_manifest, read_manifest, validate_manifest)

	rng = np.random.default_rng(2)
	records = [PatchRecord(label % 4, rng.integers(0, 256, size=(40, 40))) for label in range(5)]

	save_record(records[0], tmp_path / 'one.txt')
	assert load_record(tmp_path / 'one.txt') == records[0]

	write_records(records, tmp_path / 'many.txt')
	assert read_records(tmp_path / 'many.txt') == records

	manifest = pd.DataFrame([['r{}.txt'.format(i), 'C000', 0, i, 2] for i in range(5)],
							columns=['path', 'case_id', 'set_index', 'patch_index', 'label'])
	write_manifest(manifest, tmp_path / 'manifest.tsv')
	assert (tmp_path / 'manifest.tsv').read_text().splitlines()[0] == 'path\tcase_id\tset_index\tpatch_index\tlabel'
	pd.testing.assert_frame_equal(read_manifest(tmp_path / 'manifest.tsv'), manifest, check_dtype=False)
	validate_manifest(manifest)

	with pytest.raises(SplitError):
		validate_manifest(manifest.iloc[:4])
	mixed = manifest.copy()
	mixed.loc[0, 'label'] = 1
	with pytest.raises(SplitError):
		validate_manifest(mixed)
	with pytest.raises(SplitError):
		validate_manifest(manifest, full=True)


def test_dataset_01_untagged_records():
	"""Extracted patches carry no label until tagged; untagged records cannot be written"""
	import numpy as np
	import pytest
	from openlympho.core import RecordFormatError
	from openlympho.dataset import PatchRecord, format_record

	untagged = PatchRecord(None, np.full((40, 40), 9))

	with pytest.raises(RecordFormatError):
		format_record(untagged)
	assert format_record(untagged.with_label(0)).startswith('0,9,9,')
	with pytest.raises(RecordFormatError):
		PatchRecord(0, np.zeros((40, 39)))
