"""Command-line interface: ``openlympho <command> [options]``.

Commands: synth, extract, split, train, gradcheck, eval, predict. Options resolve as
built-in defaults < ``--config FILE`` (key=value lines) < explicit flags, and every
command that writes artifacts stores the resolved options as run_config.txt next to them.
Exit codes: 0 success, 1 runtime failure (including a failed gradient check), 2 usage error.
"""

# package(s) for data handling
import argparse
import os
import sys

import numpy as np
import pandas as pd

from openlympho.core import *
from openlympho.dataset import *
from openlympho.model import *
from openlympho.evaluator import *

run_config_name = 'run_config.txt'

# *** Default inputs: options per command ***

global_data = {"seed": 0,
               "threads": 1,
               "precision": 'f32',
               "debug": False}

command_data = {'synth': {"out": None, "cases": corpus_data['cases']},
                'extract': {"image": None, "n": corpus_data['patches_per_set'], "label": None, "out": None,
                            "case_id": None, "set_index": None,
                            "background_threshold": extract_data['background_threshold']},
                'split': {"corpus": None, "out": None, "train": None, "val": None, "test_sets": None,
                          "case_disjoint": False},
                'train': dict({"corpus": None, "split": None, "out": None, "plot": False},
                              **{key: value for key, value in train_config_data.items()
                                 if key not in ('seed', 'threads', 'precision')}),
                'gradcheck': {"out": None, "epsilon": gradcheck_data['epsilon'], "tolerance": gradcheck_data['tolerance']},
                'eval': {"model": None, "corpus": None, "split": None, "out": None, "plot": False},
                'predict': {"model": None, "record": None, "out": None}}

required_options = {'synth': ['out'],
                    'extract': ['image', 'label', 'out'],
                    'split': ['corpus', 'out'],
                    'train': ['corpus', 'split', 'out'],
                    'gradcheck': [],
                    'eval': ['model', 'corpus', 'split', 'out'],
                    'predict': ['model', 'record']}


def _boolean(value):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ('1', 'true', 'yes', 'on'):
        return True
    if str(value).lower() in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: {!r}'.format(value))


option_types = {"seed": int, "threads": int, "precision": str, "debug": _boolean,
                "out": str, "cases": int, "image": str, "n": int, "label": int, "case_id": str, "set_index": int,
                "background_threshold": float, "corpus": str, "train": int, "val": int, "test_sets": int,
                "case_disjoint": _boolean, "split": str, "plot": _boolean, "learning_rate": float,
                "momentum": float, "batch_size": int, "epochs": int, "lr_decay_factor": float,
                "lr_decay_every": int, "augment": _boolean, "epsilon": float, "tolerance": float,
                "model": str, "record": str}


class UsageError(ValueError):
    """Missing or inconsistent command-line options"""


# *** Run configuration
class RunConfig:
    """Resolved options of one command"""

    def __init__(self, command, values):
        self.command = command
        self.values = dict(values)

    def __getattr__(self, key):
        try:
            return self.__dict__['values'][key]
        except KeyError:
            raise AttributeError(key) from None

    @staticmethod
    def read(path):
        """key=value lines; '#' starts a comment, blank lines are ignored"""

        values = {}
        with open(path, 'r') as source:
            for line_number, line in enumerate(source, start=1):
                line = line.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise UsageError('{}:{}: expected key=value, got {!r}'.format(path, line_number, line))
                key, value = (part.strip() for part in line.split('=', 1))
                if key not in option_types:
                    raise UsageError('{}:{}: unknown option {!r}'.format(path, line_number, key))
                try:
                    values[key] = None if value in ('', 'None') else option_types[key](value)
                except ValueError as error:
                    raise UsageError('{}:{}: {}'.format(path, line_number, error)) from None

        return values

    @classmethod
    def resolve(cls, command, explicit):
        """defaults < config file < explicit flags"""

        values = dict(global_data, **command_data[command])
        if explicit.get('config'):
            from_file = cls.read(explicit['config'])
            values.update({key: value for key, value in from_file.items() if key in values})
        values.update({key: value for key, value in explicit.items() if key in values and value is not None})

        missing = [key for key in required_options[command] if values[key] is None]
        if missing:
            raise UsageError('{}: missing required option(s) {}'.format(
                command, ', '.join('--' + key.replace('_', '-') for key in missing)))

        return cls(command, values)

    def write(self, directory):
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, run_config_name), 'w', newline='\n') as sink:
            sink.write('# openlympho {}\n'.format(self.command))
            for key in sorted(self.values):
                sink.write('{}={}\n'.format(key, '' if self.values[key] is None else self.values[key]))


# *** Commands
def cmd_synth(run):
    manifest = synth_corpus(run.out, cases=run.cases, seed=run.seed, debug=run.debug)
    run.write(run.out)

    return 'synth: {} records from {} cases written to {}'.format(len(manifest), manifest['case_id'].nunique(), run.out)


def cmd_extract(run):
    if not 0 <= run.label < num_classes:
        raise UsageError('--label must lie in 0-{}, got {}'.format(num_classes - 1, run.label))
    if run.n < 1:
        raise UsageError('--n must be >= 1, got {}'.format(run.n))

    image = ingest_raster(run.image)
    threshold = run.background_threshold
    patches = extract_patches(image, run.n, run.seed, background_threshold=threshold)

    manifest_path = os.path.join(run.out, 'manifest.tsv')
    if os.path.exists(manifest_path):
        manifest = read_manifest(manifest_path)
    else:
        manifest = pd.DataFrame(columns=manifest_columns)
    case_id = run.case_id or os.path.splitext(os.path.basename(run.image))[0]
    existing = manifest[manifest['case_id'] == case_id]
    per_set = corpus_data['patches_per_set']

    # patches continue an incomplete last set of the case before a new set is opened
    if run.set_index is not None:
        first_slot = run.set_index * per_set
    elif len(existing):
        last = int(existing['set_index'].max())
        first_slot = last * per_set + min(int((existing['set_index'] == last).sum()), per_set)
    else:
        first_slot = 0
    first_set, last_set = first_slot // per_set, (first_slot + run.n - 1) // per_set
    if last_set >= corpus_data['sets_per_case']:
        raise UsageError('case {} would need set index {}, at most {} sets per case'.format(
            case_id, last_set, corpus_data['sets_per_case']))

    os.makedirs(os.path.join(run.out, 'records'), exist_ok=True)
    rows = []
    for number, patch in enumerate(patches):
        set_index, patch_index = divmod(first_slot + number, per_set)
        path = 'records/{}_s{}_p{}.txt'.format(case_id, set_index, patch_index)
        save_record(patch.with_label(run.label), os.path.join(run.out, path))
        rows.append([path, case_id, set_index, patch_index, run.label])

    added = pd.DataFrame(rows, columns=manifest_columns)
    manifest = added if manifest.empty else pd.concat([manifest, added], ignore_index=True)
    manifest = manifest.drop_duplicates(['case_id', 'set_index', 'patch_index'], keep='last')
    manifest = manifest.sort_values(['case_id', 'set_index', 'patch_index'])
    write_manifest(manifest, manifest_path)
    run.write(run.out)

    held = int((manifest[manifest['case_id'] == case_id]['set_index'] == last_set).sum())
    if held < per_set:
        print('note: set {} of case {} holds {} of {} patches; split and train need whole sets, '
              'the next extract of this case continues it'.format(last_set, case_id, held, per_set), file=sys.stderr)

    return 'extract: {} {} patches from {} as case {} (sets {}-{})'.format(
        len(patches), class_names[run.label], run.image, case_id, first_set, last_set)


def cmd_split(run):
    manifest = read_manifest(os.path.join(run.corpus, 'manifest.tsv'))
    counts = [run.train, run.val, run.test_sets]
    if any(count is None for count in counts) and any(count is not None for count in counts):
        raise UsageError('give all of --train, --val and --test-sets, or none of them')

    assignment = build_split(manifest, None if counts[0] is None else counts, seed=run.seed,
                             case_disjoint=run.case_disjoint)
    os.makedirs(run.out, exist_ok=True)
    write_split(assignment, os.path.join(run.out, 'split.tsv'))
    run.write(run.out)

    summary = split_counts(assignment)
    return 'split: train={} val={} test={} ({} sets)'.format(summary['train'], summary['val'], summary['test'],
                                                              summary['test_sets'])


def _load_data(run, which, dtype):
    manifest = read_manifest(os.path.join(run.corpus, 'manifest.tsv'))
    assignment = read_split(run.split)

    return load_split_arrays(manifest, assignment, which, root=run.corpus, dtype=dtype)


def _load_records(run, which):
    manifest = read_manifest(os.path.join(run.corpus, 'manifest.tsv'))

    return load_manifest_records(select_split(manifest, read_split(run.split), which), run.corpus)


def cmd_train(run):
    records = _load_records(run, 'train')
    val_records = _load_records(run, 'val')

    config = TrainConfig(**{key: run.values[key] for key in train_config_data})
    trainer = Trainer(config, debug=run.debug)
    params, history = trainer.train(records, val_records)

    os.makedirs(run.out, exist_ok=True)
    save_model(params, None, os.path.join(run.out, 'model.lymf'))
    history.to_csv(os.path.join(run.out, 'history.tsv'), sep='\t', index=False)
    run.write(run.out)
    if run.plot:
        from openlympho.plot import history_plot
        history_plot(history, best_epoch=trainer.best_epoch).savefig(os.path.join(run.out, 'history.png'))

    best = history[history['epoch'] == trainer.best_epoch].iloc[0]
    return 'train: best_epoch={} train_acc={:.4f} val_acc={:.4f} model={}'.format(
        trainer.best_epoch, best['train_accuracy'], best['val_accuracy'], os.path.join(run.out, 'model.lymf'))


def cmd_gradcheck(run):
    report = grad_check(seed=run.seed, epsilon=run.epsilon, tolerance=run.tolerance, debug=run.debug)
    if run.out:
        os.makedirs(run.out, exist_ok=True)
        report.table.to_csv(os.path.join(run.out, 'gradcheck.tsv'), sep='\t', index=False)
        run.write(run.out)

    line = 'gradcheck: max_rel_error={:.3e} tolerance={:g} {}'.format(
        report.max_error, report.tolerance, 'PASS' if report.passed else 'FAIL')
    if not report.passed:
        for row in report.worst.itertuples():
            print('  {} at {}: analytic {:.6e}, numeric {:.6e}'.format(row.block, row.worst_index, row.analytic,
                                                                     row.numeric), file=sys.stderr)

    return line, 0 if report.passed else 1


def cmd_eval(run):
    params, _ = load_model(run.model)
    X, _, identities = _load_data(run, 'test', np.float32)

    image_matrix, set_matrix, detail = evaluate(params, X, identities, threads=run.threads)
    write_report(run.out, image_matrix, set_matrix, detail)
    run.write(run.out)
    if run.plot:
        from openlympho.plot import confusion_plot
        confusion_plot(image_matrix, title='Image-by-image').savefig(os.path.join(run.out, 'image_confusion.png'))
        confusion_plot(set_matrix, title='Set-by-set').savefig(os.path.join(run.out, 'set_confusion.png'))

    if run.debug:
        for line in discordance(image_matrix):
            print('  ' + line)
        fallback = int((detail['decided_by'] == 'probability_fallback').sum())
        print('  {} of {} sets decided by the probability fallback'.format(fallback, len(detail)))

    return 'image_acc={:.4f} set_acc={:.4f} ({}/{} images, {}/{} sets)'.format(
        image_matrix.accuracy, set_matrix.accuracy, image_matrix.correct, image_matrix.total,
        set_matrix.correct, set_matrix.total)


def cmd_predict(run):
    params, _ = load_model(run.model)
    records = read_records(run.record)
    X, _ = records_to_arrays(records)
    predictions = predict_batch(params, X, threads=run.threads)

    rows = [[number, class_names[prediction.predicted_class]] + [float(p) for p in prediction.probabilities]
            for number, prediction in enumerate(predictions)]
    frame = pd.DataFrame(rows, columns=['record', 'predicted'] + class_names)
    if run.out:
        os.makedirs(run.out, exist_ok=True)
        frame.to_csv(os.path.join(run.out, 'predictions.tsv'), sep='\t', index=False)
        run.write(run.out)

    if len(predictions) == 1:
        prediction = predictions[0]
        return 'predict: {} ({})'.format(class_names[prediction.predicted_class],
                                         ' '.join('{}={:.4f}'.format(name, p) for name, p in
                                                  zip(class_names, prediction.probabilities)))

    counts = frame['predicted'].value_counts().reindex(class_names, fill_value=0)
    return 'predict: {} records, {}'.format(len(frame), ' '.join('{}={}'.format(name, int(count))
                                                               for name, count in counts.items()))


commands = {'synth': cmd_synth,
            'extract': cmd_extract,
            'split': cmd_split,
            'train': cmd_train,
            'gradcheck': cmd_gradcheck,
            'eval': cmd_eval,
            'predict': cmd_predict}


# *** Parser
def _parser():
    # suppressed defaults: global flags may stand before or after the command
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--seed', type=int, help='seed of every random draw (default 0)')
    common.add_argument('--threads', type=int, help='evaluation workers; never changes results (default 1)')
    common.add_argument('--precision', choices=['f32', 'f64'], help='training precision (default f32)')
    common.add_argument('--config', help='key=value file with option values')
    common.add_argument('--debug', action='store_const', const=True, help='print progress')

    parser = argparse.ArgumentParser(prog='openlympho', parents=[common],
                                     description='Lymphoma patch classification: data, training and scoring.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('synth', parents=[common], help='write a synthetic corpus')
    p.add_argument('--out', help='output directory')
    p.add_argument('--cases', type=int, help='number of cases, a multiple of 4 (default 128)')

    p = sub.add_parser('extract', parents=[common], help='cut labeled patches from a PGM/PPM image')
    p.add_argument('--image', help='PGM or PPM file')
    p.add_argument('--n', type=int, help='number of patches (default 5, one set)')
    p.add_argument('--label', type=int, help='class code 0-3')
    p.add_argument('--out', help='corpus directory; manifest.tsv is created or extended')
    p.add_argument('--case-id', dest='case_id', help='case identifier (default: image file name)')
    p.add_argument('--set-index', dest='set_index', type=int, help='first set index (default: next free)')
    p.add_argument('--background-threshold', dest='background_threshold', type=float, nargs='?',
                   const=extract_data['default_threshold'],
                   help='reject patches brighter than this mean intensity (default off, {} without a value)'.format(
                       extract_data['default_threshold']))

    p = sub.add_parser('split', parents=[common], help='assign corpus records to train/val/test')
    p.add_argument('--corpus', help='corpus directory holding manifest.tsv')
    p.add_argument('--out', help='output directory for split.tsv')
    p.add_argument('--train', type=int, help='training images')
    p.add_argument('--val', type=int, help='validation images')
    p.add_argument('--test-sets', dest='test_sets', type=int, help='whole test set-groups, a multiple of 4')
    p.add_argument('--case-disjoint', dest='case_disjoint', action='store_const', const=True,
                   help='test and validation take whole cases')

    p = sub.add_parser('train', parents=[common], help='train the patch network')
    p.add_argument('--corpus', help='corpus directory holding manifest.tsv')
    p.add_argument('--split', help='split.tsv')
    p.add_argument('--out', help='output directory for model.lymf and history.tsv')
    p.add_argument('--learning-rate', dest='learning_rate', type=float)
    p.add_argument('--momentum', type=float)
    p.add_argument('--batch-size', dest='batch_size', type=int)
    p.add_argument('--epochs', type=int)
    p.add_argument('--lr-decay-factor', dest='lr_decay_factor', type=float)
    p.add_argument('--lr-decay-every', dest='lr_decay_every', type=int)
    p.add_argument('--augment', action='store_const', const=True, help='add rotated and flipped copies')
    p.add_argument('--plot', action='store_const', const=True, help='also write history.png')

    p = sub.add_parser('gradcheck', parents=[common], help='check the backward pass on the toy network')
    p.add_argument('--epsilon', type=float)
    p.add_argument('--tolerance', type=float)
    p.add_argument('--out', help='optional output directory for gradcheck.tsv')

    p = sub.add_parser('eval', parents=[common], help='score the test split image by image and set by set')
    p.add_argument('--model', help='model.lymf')
    p.add_argument('--corpus', help='corpus directory holding manifest.tsv')
    p.add_argument('--split', help='split.tsv')
    p.add_argument('--out', help='output directory for the confusion TSVs')
    p.add_argument('--plot', action='store_const', const=True, help='also write confusion figures')

    p = sub.add_parser('predict', parents=[common], help='classify patch records')
    p.add_argument('--model', help='model.lymf')
    p.add_argument('--record', help='record file, one or more lines')
    p.add_argument('--out', help='optional output directory for predictions.tsv')

    return parser


def cli(argv=None):
    """Entry point of the openlympho console script; returns the exit code"""

    try:
        arguments = vars(_parser().parse_args(argv))
    except SystemExit as stop:
        return stop.code

    command = arguments.pop('command')
    try:
        run = RunConfig.resolve(command, arguments)
        outcome = commands[command](run)
    except UsageError as error:
        print('error: {}'.format(error), file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError, FloatingPointError, AssertionError) as error:
        print('error: {}'.format(error), file=sys.stderr)
        return 1

    line, code = outcome if isinstance(outcome, tuple) else (outcome, 0)
    print(line)

    return code


if __name__ == '__main__':
    sys.exit(cli())
