"""Synthetic class-conditional patches and corpora.

Desk-scale stand-in for real slide captures: each class is a texture on a field
with additive gaussian noise, parameterized by the versioned table in
patch_defaults.synth_parameter_table.
"""

# package(s) for data handling
import os

import numpy as np
import pandas as pd
from scipy.ndimage import gaussian_filter

from .patch_defaults import *
from .patch_records import PatchRecord, save_record, write_manifest, manifest_columns


def _seed_entropy(label, seed, version):
    parts = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    if any(int(part) < 0 for part in parts):
        raise ValueError('seeds must be non-negative, got {}'.format(seed))

    return [version, label] + [int(part) for part in parts]


def synth_generate(label, seed, table=synth_parameter_table):
    """Deterministic synthetic PatchRecord for a class label and a seed (int or tuple of ints)"""

    if isinstance(label, bool) or int(label) != label or not 0 <= int(label) < num_classes:
        raise ValueError('label out of range 0-{}: {}'.format(num_classes - 1, label))
    label = int(label)
    texture = table['textures'][label]
    rng = np.random.default_rng(_seed_entropy(label, seed, table['version']))

    # blob mask: union of disks with jittered radii, centers anywhere in the patch
    rows, cols = np.mgrid[0:patch_side, 0:patch_side]
    centers = rng.uniform(0, patch_side, size=(texture['blob_count'], 2))
    radii = texture['blob_radius'] + rng.uniform(-texture['radius_jitter'], texture['radius_jitter'],
                                                 size=texture['blob_count'])
    distance2 = (rows[None] - centers[:, 0, None, None]) ** 2 + (cols[None] - centers[:, 1, None, None]) ** 2
    mask = np.any(distance2 <= (radii ** 2)[:, None, None], axis=0).astype(np.float64)
    if texture['softness'] > 0:
        mask = gaussian_filter(mask, sigma=texture['softness'], mode='nearest')

    image = texture['field'] + texture['contrast'] * mask + rng.normal(0, table['noise_sd'], size=mask.shape)

    return PatchRecord(label, np.clip(np.floor(image + 0.5), 0, 255).astype(np.uint8))


def synth_corpus(out_dir, cases=corpus_data['cases'], seed=corpus_data['seed'], debug=False):
    """Write cases x 4 sets x 5 patches records plus manifest.tsv under out_dir.

    Case i carries label i mod 4, so any case count divisible by 4 is balanced.
    returns the manifest DataFrame (paths relative to out_dir)"""

    if cases < 1 or cases % num_classes != 0:
        raise ValueError('cases must be a positive multiple of {}, got {}'.format(num_classes, cases))

    record_dir = os.path.join(out_dir, 'records')
    os.makedirs(record_dir, exist_ok=True)

    rows = []
    for case in range(cases):
        case_id = 'C{:03d}'.format(case)
        label = case % num_classes
        if debug:
            print('  *** synthesize case {} ({})'.format(case_id, class_names[label]))
        for set_index in range(corpus_data['sets_per_case']):
            for patch_index in range(corpus_data['patches_per_set']):
                record = synth_generate(label, (seed, case, set_index, patch_index))
                path = 'records/{}_s{}_p{}.txt'.format(case_id, set_index, patch_index)
                save_record(record, os.path.join(out_dir, path))
                rows.append([path, case_id, set_index, patch_index, label])

    manifest = pd.DataFrame(rows, columns=manifest_columns)
    write_manifest(manifest, os.path.join(out_dir, 'manifest.tsv'))

    return manifest
