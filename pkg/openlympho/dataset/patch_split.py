"""Train/validation/test splits, input normalization and augmentation."""

# package(s) for data handling
import os

import numpy as np
import pandas as pd

from openlympho.core import SplitError
from .patch_defaults import *
from .patch_records import PatchRecord, validate_manifest, load_manifest_records

split_columns = ['case_id', 'set_index', 'patch_index', 'split']
split_names = ['train', 'val', 'test']
identity_columns = ['case_id', 'set_index', 'patch_index']


# *** Splits
def default_counts(manifest):
    """(train, val, test_sets) scaled from the 1856/464/48 split of the full corpus"""

    groups = manifest.drop_duplicates(['case_id', 'set_index'])
    smallest = int(groups.groupby('label').size().reindex(range(num_classes), fill_value=0).min())
    per_class = max(1, int(round(smallest * reference_test_sets_per_class / 128)))
    test_sets = num_classes * per_class

    remaining = len(manifest) - test_sets * corpus_data['patches_per_set']
    val = int(round(val_fraction * remaining))

    return remaining - val, val, test_sets


def _check_counts(manifest, counts):
    train, val, test_sets = counts
    if min(train, val, test_sets) < 0:
        raise SplitError('split counts must be non-negative, got {}'.format(counts))
    if test_sets % num_classes != 0:
        raise SplitError('test_sets must be divisible by {} for class balance, got {}'.format(num_classes, test_sets))

    requested = train + val + test_sets * corpus_data['patches_per_set']
    if requested > len(manifest):
        raise SplitError('counts {} ask for {} images, corpus holds {}'.format(counts, requested, len(manifest)))
    if requested < len(manifest):
        raise SplitError('counts {} cover {} of {} images; every row must be assigned'.format(
            counts, requested, len(manifest)))


def build_split(manifest, counts=None, seed=split_data['seed'], case_disjoint=split_data['case_disjoint']):
    """Assign every manifest row to train, val or test.

    Test receives whole set-groups, test_sets / 4 per class. The remaining images are
    shuffled and cut image-wise into train and val. With case_disjoint, test and val
    take whole cases instead and the train/val counts become approximate.
    returns a DataFrame with columns case_id, set_index, patch_index, split"""

    validate_manifest(manifest)
    if counts is None:
        counts = default_counts(manifest)
    counts = tuple(int(count) for count in counts)
    _check_counts(manifest, counts)
    train, val, test_sets = counts
    per_class = test_sets // num_classes

    rows = manifest.sort_values(identity_columns).reset_index(drop=True)
    rng = np.random.default_rng(seed)
    split = np.full(len(rows), '', dtype=object)

    if not case_disjoint:
        groups = rows.drop_duplicates(['case_id', 'set_index'])[['case_id', 'set_index', 'label']]
        for label in range(num_classes):
            candidates = groups[groups['label'] == label]
            if len(candidates) < per_class:
                raise SplitError('class {} has {} set-groups, {} requested for test'.format(
                    class_names[label], len(candidates), per_class))
            chosen = candidates.iloc[np.sort(rng.choice(len(candidates), per_class, replace=False))]
            keys = set(zip(chosen['case_id'], chosen['set_index']))
            split[[key in keys for key in zip(rows['case_id'], rows['set_index'])]] = 'test'

        remaining = np.flatnonzero(split == '')
        order = rng.permutation(remaining)
        split[order[:train]] = 'train'
        split[order[train:]] = 'val'
    else:
        cases = rows.drop_duplicates('case_id')[['case_id', 'label']]
        sets_per_case = rows.drop_duplicates(['case_id', 'set_index']).groupby('case_id').size()
        if sets_per_case.nunique() != 1:
            raise SplitError('case-disjoint splits need the same number of sets per case')
        sets_per_case = int(sets_per_case.iloc[0])
        if per_class % sets_per_case != 0:
            raise SplitError('case-disjoint splits need test sets per class ({}) divisible by sets per case ({})'.format(
                per_class, sets_per_case))

        test_cases = set()
        for label in range(num_classes):
            candidates = cases[cases['label'] == label]['case_id'].to_numpy()
            wanted = per_class // sets_per_case
            if len(candidates) < wanted:
                raise SplitError('class {} has {} cases, {} requested for test'.format(class_names[label], len(candidates), wanted))
            test_cases.update(candidates[np.sort(rng.choice(len(candidates), wanted, replace=False))])

        images_per_case = sets_per_case * corpus_data['patches_per_set']
        others = rng.permutation([case for case in cases['case_id'] if case not in test_cases])
        val_cases = set(others[:int(round(val / images_per_case))])

        split[:] = 'train'
        split[rows['case_id'].isin(val_cases).to_numpy()] = 'val'
        split[rows['case_id'].isin(test_cases).to_numpy()] = 'test'

    assignment = rows[identity_columns].copy()
    assignment['split'] = split

    return assignment


def split_counts(assignment):
    """images per split and whole test set-groups"""

    counts = assignment['split'].value_counts().reindex(split_names, fill_value=0).to_dict()
    test = assignment[assignment['split'] == 'test']
    counts['test_sets'] = len(test.drop_duplicates(['case_id', 'set_index']))

    return counts


def write_split(assignment, path):
    assignment[split_columns].to_csv(path, sep='\t', index=False)


def read_split(path):
    assignment = pd.read_csv(path, sep='\t', dtype={'case_id': str, 'split': str}, keep_default_na=False)
    if list(assignment.columns) != split_columns:
        raise SplitError('{}: expected columns {}, found {}'.format(path, split_columns, list(assignment.columns)))
    bad = ~assignment['split'].isin(split_names)
    if bad.any():
        raise SplitError('{}: unknown split name {!r}'.format(path, assignment['split'][bad].iloc[0]))

    return assignment


def select_split(manifest, assignment, which):
    """manifest rows of one split, sorted by record identity"""

    merged = manifest.merge(assignment, on=identity_columns, how='left', validate='one_to_one')
    if merged['split'].isna().any():
        raise SplitError('{} manifest rows have no split assignment'.format(int(merged['split'].isna().sum())))

    chosen = merged[merged['split'] == which].drop(columns='split')

    return chosen.sort_values(identity_columns).reset_index(drop=True)


# *** Normalization and augmentation
def normalize(record, dtype=np.float32):
    """Map intensities x to x / 127.5 - 1, shaped [1, 40, 40]"""

    pixels = record.pixels if isinstance(record, PatchRecord) else np.asarray(record)

    return (pixels.astype(dtype) / dtype(127.5) - dtype(1)).reshape(1, patch_side, patch_side)


def records_to_arrays(records, dtype=np.float32):
    """Stack records into (X [N, 1, 40, 40], y [N])"""

    if len(records) == 0:
        return np.zeros((0, 1, patch_side, patch_side), dtype=dtype), np.zeros(0, dtype=np.int64)

    pixels = np.stack([record.pixels for record in records])
    X = (pixels.astype(dtype) / dtype(127.5) - dtype(1)).reshape(len(records), 1, patch_side, patch_side)
    y = np.array([record.label for record in records], dtype=np.int64)

    return X, y


def load_split_arrays(manifest, assignment, which, root='.', dtype=np.float32):
    """(X, y, identities) of one split; identities keep case_id, set_index, patch_index, label"""

    rows = select_split(manifest, assignment, which)
    X, y = records_to_arrays(load_manifest_records(rows, root), dtype)

    return X, y, rows[identity_columns + ['label']]


augment_ops = {'rot90': lambda pixels: np.rot90(pixels, 1),
               'rot180': lambda pixels: np.rot90(pixels, 2),
               'rot270': lambda pixels: np.rot90(pixels, 3),
               'flip_h': np.fliplr,
               'flip_v': np.flipud,
               'invert': lambda pixels: 255 - pixels}

geometric_ops = ['rot90', 'rot180', 'rot270', 'flip_h', 'flip_v']


def augment(record, op):
    """Apply one exact geometric map (or intensity inversion); the label is kept"""

    if op not in augment_ops:
        raise ValueError('unknown augmentation {!r}, expected one of {}'.format(op, sorted(augment_ops)))

    return PatchRecord(record.label, np.ascontiguousarray(augment_ops[op](record.pixels)))


def augment_records(records, ops=geometric_ops):
    """records followed by every record transformed by every op"""

    expanded = list(records)
    for op in ops:
        expanded.extend(augment(record, op) for record in records)

    return expanded
