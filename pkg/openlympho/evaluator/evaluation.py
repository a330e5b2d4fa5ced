"""Image-by-image scoring, set-by-set majority voting and confusion matrices.

Matrices are laid out predicted diagnosis (rows) x observed diagnosis (columns).
"""

# package(s) for data handling
import os

import numpy as np
import pandas as pd

from openlympho.core import *
from openlympho.dataset import PatchRecord, normalize, class_names, num_classes, corpus_data
from openlympho.model import infer_logits, inference_batch_size

identity_columns = ['case_id', 'set_index', 'patch_index']
detail_columns = ['case_id', 'set_index', 'votes', 'decided_by', 'predicted', 'observed']
majority_votes = 3


# *** Result types
class ImagePrediction:
    """Probabilities of one patch; predicted_class is the first (lowest-index) maximum"""

    def __init__(self, case_id=None, set_index=None, patch_index=None, probabilities=None, observed_class=None):
        self.case_id = case_id
        self.set_index = set_index
        self.patch_index = patch_index
        self.probabilities = np.asarray(probabilities, dtype=np.float64)
        self.observed_class = observed_class

        if self.probabilities.shape != (num_classes,):
            raise ShapeError('expected {} probabilities, got shape {}'.format(num_classes, self.probabilities.shape))

    @property
    def predicted_class(self):
        return int(np.argmax(self.probabilities))

    @property
    def identity(self):
        return (self.case_id, self.set_index, self.patch_index)

    def __repr__(self):
        return 'ImagePrediction({}, predicted={}, observed={})'.format(self.identity, self.predicted_class, self.observed_class)


class SetPrediction:
    """Decision for one set-group of five patches

    decided_by: 'majority' when a class got at least three votes, else 'probability_fallback'"""

    def __init__(self, case_id, set_index, votes, predicted_class, decided_by, observed_class=None, probability_sums=None):
        self.case_id = case_id
        self.set_index = set_index
        self.votes = list(votes)
        self.predicted_class = predicted_class
        self.decided_by = decided_by
        self.observed_class = observed_class
        self.probability_sums = probability_sums

    def __repr__(self):
        return 'SetPrediction(({}, {}), votes={}, predicted={}, {})'.format(
            self.case_id, self.set_index, self.votes, self.predicted_class, self.decided_by)


class ConfusionMatrix:
    """counts[predicted][observed]"""

    def __init__(self, counts=None):
        counts = np.zeros((num_classes, num_classes), dtype=np.int64) if counts is None else np.array(counts, dtype=np.int64)
        if counts.shape != (num_classes, num_classes) or np.any(counts < 0):
            raise ValueError('confusion counts must be a non-negative {0}x{0} grid'.format(num_classes))
        self.counts = counts

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def correct(self):
        return int(np.trace(self.counts))

    @property
    def no_samples(self):
        return self.total == 0

    @property
    def accuracy(self):
        """trace / total, NaN without samples"""
        return np.nan if self.no_samples else self.correct / self.total

    def to_frame(self):
        frame = pd.DataFrame(self.counts, index=class_names, columns=class_names)
        frame.index.name = 'predicted'
        return frame

    def __repr__(self):
        return 'ConfusionMatrix(accuracy={}/{})'.format(self.correct, self.total)


# *** Prediction
def predict_image(params, record, identity=(None, None, None)):
    """Softmax probabilities of one PatchRecord (or normalized [1, 40, 40] array)"""

    if isinstance(record, PatchRecord):
        x = normalize(record, params.dtype.type)
        observed = record.label
    else:
        x = np.asarray(record, dtype=params.dtype)
        observed = None

    logits = infer_logits(params, x[np.newaxis])

    return ImagePrediction(*identity, probabilities=softmax(logits[0]), observed_class=observed)


def predict_batch(params, X, identities=None, observed=None, threads=1, batch_size=inference_batch_size):
    """ImagePredictions for X [N, 1, 40, 40], computed over fixed chunks (optionally threaded).

    identities: DataFrame with case_id, set_index, patch_index (and label, used as
    observed class when observed is None)"""

    X = np.asarray(X, dtype=params.dtype)
    probabilities = softmax(infer_logits(params, X, threads=threads, batch_size=batch_size))

    if identities is None:
        keys = [(None, None, index) for index in range(len(X))]
    else:
        if len(identities) != len(X):
            raise ShapeError('{} identities for {} images'.format(len(identities), len(X)))
        keys = list(identities[identity_columns].itertuples(index=False, name=None))
        if observed is None and 'label' in identities:
            observed = identities['label'].to_numpy()
    if observed is None:
        observed = [None] * len(X)

    return [ImagePrediction(case_id, set_index, patch_index, row, None if label is None else int(label))
            for (case_id, set_index, patch_index), row, label in zip(keys, probabilities, observed)]


# *** Voting
def vote_set(predictions):
    """3-of-5 majority vote; without majority the largest summed probability wins (lowest index on ties)"""

    predictions = list(predictions)
    if len(predictions) != corpus_data['patches_per_set']:
        raise VotingError('a set-group holds {} predictions, expected {}'.format(
            len(predictions), corpus_data['patches_per_set']))
    groups = {(prediction.case_id, prediction.set_index) for prediction in predictions}
    if len(groups) != 1:
        raise VotingError('predictions from different set-groups: {}'.format(sorted(groups, key=str)))
    observed = {prediction.observed_class for prediction in predictions}
    if len(observed) != 1:
        raise VotingError('set-group {} mixes observed classes {}'.format(groups.pop(), sorted(observed, key=str)))

    case_id, set_index = groups.pop()
    votes = [prediction.predicted_class for prediction in predictions]
    tally = np.bincount(votes, minlength=num_classes)
    sums = np.sum([prediction.probabilities for prediction in predictions], axis=0)

    if tally.max() >= majority_votes:
        predicted, decided_by = int(np.argmax(tally)), 'majority'
    else:
        predicted, decided_by = int(np.argmax(sums)), 'probability_fallback'

    return SetPrediction(case_id, set_index, votes, predicted, decided_by, observed.pop(), sums)


# *** Scoring
def confusion(pairs):
    """ConfusionMatrix of (predicted, observed) pairs"""

    matrix = ConfusionMatrix()
    for predicted, observed in pairs:
        if not (0 <= predicted < num_classes and 0 <= observed < num_classes):
            raise ValueError('class index out of range 0-{}: ({}, {})'.format(num_classes - 1, predicted, observed))
        matrix.counts[int(predicted), int(observed)] += 1

    return matrix


def evaluate(params, X, identities, threads=1, batch_size=inference_batch_size):
    """Image-level and set-level scoring of a test split.

    identities: DataFrame with case_id, set_index, patch_index, label, aligned with X.
    Rows are sorted by identity first, so the input order does not matter.
    returns (image ConfusionMatrix, set ConfusionMatrix, per-set detail DataFrame)"""

    identities = identities.reset_index(drop=True)
    sizes = identities.groupby(['case_id', 'set_index']).size()
    partial = sizes[sizes != corpus_data['patches_per_set']]
    if len(partial):
        case_id, set_index = partial.index[0]
        raise SplitError('{} partial set-groups in the test split, e.g. {} set {} with {} images'.format(
            len(partial), case_id, set_index, int(partial.iloc[0])))

    order = identities.sort_values(identity_columns).index.to_numpy()
    identities = identities.loc[order].reset_index(drop=True)
    predictions = predict_batch(params, np.asarray(X)[order], identities, threads=threads, batch_size=batch_size)

    image_matrix = confusion((prediction.predicted_class, prediction.observed_class) for prediction in predictions)

    per_set = corpus_data['patches_per_set']
    sets = [vote_set(predictions[start:start + per_set]) for start in range(0, len(predictions), per_set)]
    set_matrix = confusion((prediction.predicted_class, prediction.observed_class) for prediction in sets)

    detail = pd.DataFrame([[prediction.case_id, prediction.set_index, ','.join(str(vote) for vote in prediction.votes),
                            prediction.decided_by, prediction.predicted_class, prediction.observed_class]
                           for prediction in sets], columns=detail_columns)

    return image_matrix, set_matrix, detail


def discordance(matrix):
    """one line per non-zero off-diagonal cell, e.g. '4 SLL images were predicted as Benign'"""

    lines = []
    for observed in range(num_classes):
        for predicted in range(num_classes):
            count = int(matrix.counts[predicted, observed])
            if predicted != observed and count:
                lines.append('{} {} {} predicted as {}'.format(
                    count, class_names[observed], 'image was' if count == 1 else 'images were', class_names[predicted]))

    return lines


def write_report(out_dir, image_matrix, set_matrix, detail):
    """image_confusion.tsv, set_confusion.tsv and sets_detail.tsv under out_dir"""

    os.makedirs(out_dir, exist_ok=True)
    image_matrix.to_frame().to_csv(os.path.join(out_dir, 'image_confusion.tsv'), sep='\t')
    set_matrix.to_frame().to_csv(os.path.join(out_dir, 'set_confusion.tsv'), sep='\t')
    detail[detail_columns].to_csv(os.path.join(out_dir, 'sets_detail.tsv'), sep='\t', index=False)


def read_confusion(path):
    """ConfusionMatrix back from a confusion TSV"""

    frame = pd.read_csv(path, sep='\t', index_col=0)
    if list(frame.index) != class_names or list(frame.columns) != class_names:
        raise ValueError('{}: expected a {} grid labelled {}'.format(path, num_classes, class_names))

    return ConfusionMatrix(frame.to_numpy())
