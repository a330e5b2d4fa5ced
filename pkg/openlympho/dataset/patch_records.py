"""Patch records and the manifest.

A record is one labeled 40x40 grayscale patch. Its text form is a single line of
1601 comma-separated decimal integers: the label, then 1600 row-major
intensities. The packed binary form is 1 label byte followed by 1600 intensity
bytes.
"""

# package(s) for data handling
import io
import os

import numpy as np
import pandas as pd

from openlympho.core import RecordFormatError, SplitError
from .patch_defaults import *


class PatchRecord(object):
    """One labeled patch

    label: 0 benign, 1 DLBCL, 2 BL, 3 SLL (None while untagged)
    pixels: 40x40 uint8 intensities"""

    def __init__(self, label, pixels):
        pixels = np.asarray(pixels)
        if pixels.size != patch_pixels:
            raise RecordFormatError('expected {} intensities, found {}'.format(patch_pixels, pixels.size))
        if not np.issubdtype(pixels.dtype, np.integer):
            if not np.all(np.mod(pixels, 1) == 0):
                raise RecordFormatError('intensities must be integers')
        if pixels.min() < 0 or pixels.max() > 255:
            bad = int(np.flatnonzero((pixels.ravel() < 0) | (pixels.ravel() > 255))[0])
            raise RecordFormatError('entry {}: intensity {} outside 0-255'.format(bad + 2, pixels.ravel()[bad]))
        if label is not None:
            _check_label(label, 1)

        self.label = None if label is None else int(label)
        self.pixels = pixels.reshape(patch_side, patch_side).astype(np.uint8)

    def with_label(self, label):
        """return a tagged copy"""
        return PatchRecord(label, self.pixels.copy())

    def entries(self):
        """the 1601 stored entries, label first"""
        if self.label is None:
            raise RecordFormatError('record is untagged; assign a label before writing it')
        return [self.label] + self.pixels.ravel().tolist()

    def __eq__(self, other):
        if not isinstance(other, PatchRecord):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return 'PatchRecord(label={}, mean={:.1f})'.format(self.label, float(self.pixels.mean()))


def _check_label(value, entry):
    if isinstance(value, (bool, np.bool_)) or int(value) != value or not 0 <= int(value) < num_classes:
        raise RecordFormatError('entry {}: label {} not in 0-{}'.format(entry, value, num_classes - 1))


# *** Text form
def format_record(record):
    return ','.join(str(entry) for entry in record.entries()) + '\n'


def parse_record(line):
    """Parse one text line into a PatchRecord; errors name the 1-based entry index"""

    if isinstance(line, bytes):
        try:
            line = line.decode('ascii')
        except UnicodeDecodeError as exc:
            raise RecordFormatError('record is not ASCII text: {}'.format(exc))

    tokens = line.rstrip('\r\n').split(',')
    if len(tokens) != record_entries:
        raise RecordFormatError('expected {} entries, found {}'.format(record_entries, len(tokens)))

    for entry, token in enumerate(tokens, start=1):
        if not (token.isascii() and token.isdigit()):
            raise RecordFormatError('entry {}: non-integer token {!r}'.format(entry, token))

    values = np.array([int(token) for token in tokens], dtype=np.int64)
    _check_label(values[0], 1)
    outside = np.flatnonzero(values[1:] > 255)
    if outside.size:
        raise RecordFormatError('entry {}: intensity {} outside 0-255'.format(outside[0] + 2, values[outside[0] + 1]))

    return PatchRecord(int(values[0]), values[1:])


def write_record(record, sink):
    """Write the text form to a text or binary stream; returns the number of bytes written"""

    line = format_record(record)
    if isinstance(sink, io.TextIOBase):
        sink.write(line)
    else:
        sink.write(line.encode('ascii'))

    return len(line)


def read_record(source):
    """Read one text record from a stream, a str or a bytes line"""

    if isinstance(source, (str, bytes)):
        return parse_record(source)

    line = source.readline()
    if not line:
        raise RecordFormatError('expected {} entries, found 0'.format(record_entries))

    return parse_record(line)


# *** Packed binary form
def write_record_binary(record, sink):
    data = bytes([record.entries()[0]]) + record.pixels.tobytes()
    sink.write(data)

    return len(data)


def read_record_binary(source):
    data = source if isinstance(source, bytes) else source.read(record_entries)
    if len(data) != record_entries:
        raise RecordFormatError('expected {} bytes, found {}'.format(record_entries, len(data)))

    _check_label(data[0], 1)

    return PatchRecord(data[0], np.frombuffer(data, dtype=np.uint8, offset=1))


# *** Files
def save_record(record, path):
    with open(path, 'w', newline='\n') as sink:
        write_record(record, sink)


def load_record(path):
    with open(path, 'r', newline='') as source:
        try:
            return read_record(source)
        except RecordFormatError as exc:
            raise RecordFormatError('{}: {}'.format(path, exc))


def write_records(records, path):
    """Write many records, one line each"""

    with open(path, 'w', newline='\n') as sink:
        for record in records:
            write_record(record, sink)


def read_records(path):
    records = []
    with open(path, 'r', newline='') as source:
        for line_number, line in enumerate(source, start=1):
            if not line.strip():
                continue
            try:
                records.append(parse_record(line))
            except RecordFormatError as exc:
                raise RecordFormatError('{}:{}: {}'.format(path, line_number, exc))

    return records


# *** Manifest
manifest_columns = ['path', 'case_id', 'set_index', 'patch_index', 'label']


def write_manifest(manifest, path):
    manifest[manifest_columns].to_csv(path, sep='\t', index=False)


def read_manifest(path):
    manifest = pd.read_csv(path, sep='\t', dtype={'path': str, 'case_id': str}, keep_default_na=False)
    missing = [column for column in manifest_columns if column not in manifest.columns]
    if missing:
        raise SplitError('{}: manifest lacks columns {}'.format(path, missing))

    return manifest[manifest_columns]


def validate_manifest(manifest, full=False):
    """Check the set-group structure; with full=True also the 128 x 4 x 5 corpus shape"""

    missing = [column for column in manifest_columns if column not in manifest.columns]
    if missing:
        raise SplitError('manifest lacks columns {}'.format(missing))
    if len(manifest) == 0:
        raise SplitError('manifest is empty')
    if not manifest['set_index'].between(0, corpus_data['sets_per_case'] - 1).all():
        raise SplitError('set_index outside 0-{}'.format(corpus_data['sets_per_case'] - 1))
    if not manifest['patch_index'].between(0, corpus_data['patches_per_set'] - 1).all():
        raise SplitError('patch_index outside 0-{}'.format(corpus_data['patches_per_set'] - 1))
    if not manifest['label'].between(0, num_classes - 1).all():
        raise SplitError('label outside 0-{}'.format(num_classes - 1))
    if manifest.duplicated(['case_id', 'set_index', 'patch_index']).any():
        raise SplitError('duplicate (case_id, set_index, patch_index) rows')

    groups = manifest.groupby(['case_id', 'set_index'])
    sizes = groups.size()
    if (sizes != corpus_data['patches_per_set']).any():
        case_id, set_index = sizes[sizes != corpus_data['patches_per_set']].index[0]
        raise SplitError('set-group ({}, {}) has {} rows, expected {}'.format(
            case_id, set_index, sizes[(case_id, set_index)], corpus_data['patches_per_set']))
    mixed = groups['label'].nunique() > 1
    if mixed.any():
        raise SplitError('set-group {} mixes labels'.format(mixed[mixed].index[0]))
    if (manifest.groupby('case_id')['label'].nunique() > 1).any():
        raise SplitError('a case carries more than one label')

    if full:
        expected = corpus_data['cases'] * corpus_data['sets_per_case'] * corpus_data['patches_per_set']
        if len(manifest) != expected:
            raise SplitError('full corpus needs {} rows, found {}'.format(expected, len(manifest)))
        per_label = manifest.groupby('label')['case_id'].nunique()
        if len(per_label) != num_classes or (per_label != corpus_data['cases'] // num_classes).any():
            raise SplitError('full corpus needs {} cases per label, found {}'.format(
                corpus_data['cases'] // num_classes, per_label.to_dict()))

    return manifest


def load_manifest_records(manifest, root='.'):
    """Read the records referenced by the manifest (paths relative to root), in manifest order"""

    records = []
    for row in manifest.itertuples(index=False):
        record = load_record(os.path.join(root, row.path))
        if record.label != row.label:
            raise RecordFormatError('{}: label {} disagrees with manifest label {}'.format(row.path, record.label, row.label))
        records.append(record)

    return records
