# package(s) for data handling
import numpy as np
import matplotlib.pyplot as plt

from openlympho.dataset import class_names


# *** General functions
def history_plot(history, title='Training history', fontsize=14, best_epoch=None):
    """Loss and accuracy per epoch from a training history DataFrame"""

    epochs = history['epoch'].values

    # generate plot canvas
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(16, 6))

    colors = ['steelblue', 'firebrick']

    # loss (left) and accuracy (right), train and validation
    ax1.plot(epochs, history['train_loss'].values, color=colors[0], label='train')
    ax1.plot(epochs, history['val_loss'].values, color=colors[1], label='validation')
    ax2.plot(epochs, history['train_accuracy'].values, color=colors[0], label='train')
    ax2.plot(epochs, history['val_accuracy'].values, color=colors[1], label='validation')

    if best_epoch is not None:
        ax2.axvline(best_epoch, color='darkgrey', linestyle='--', zorder=0, label='kept epoch')

    # title and labels
    fig.suptitle(title, fontsize=fontsize)
    ax1.set_xlabel('Epoch', fontsize=fontsize)
    ax1.set_ylabel('Cross-entropy [-]', fontsize=fontsize)
    ax2.set_xlabel('Epoch', fontsize=fontsize)
    ax2.set_ylabel('Accuracy [-]', fontsize=fontsize)
    ax2.set_ylim(0, 1.02)

    # add grid and legend
    for ax in (ax1, ax2):
        ax.grid(zorder=0, which='major', axis='both')
        ax.legend(fancybox=True, shadow=True, fontsize=fontsize * 0.8)

    return fig


def confusion_plot(matrix, title='Confusion matrix', fontsize=14, cmap='Blues'):
    """Predicted (rows) x observed (columns) grid with the counts written in the cells"""

    counts = matrix.counts

    # generate plot canvas
    fig, ax1 = plt.subplots(figsize=(7, 6))
    image = ax1.imshow(counts, cmap=cmap, zorder=1)

    # cell counts, light text on dark cells
    threshold = counts.max() / 2 if counts.size else 0
    for row, col in np.ndindex(counts.shape):
        ax1.text(col, row, int(counts[row, col]), ha='center', va='center', fontsize=fontsize,
                 color='white' if counts[row, col] > threshold else 'black')

    # title and labels
    accuracy = 'n/a' if matrix.no_samples else '{}/{}={:.0%}'.format(matrix.correct, matrix.total, matrix.accuracy)
    ax1.set_title('{} (accuracy: {})'.format(title, accuracy), fontsize=fontsize)
    ax1.set_xlabel('Observed diagnosis', fontsize=fontsize)
    ax1.set_ylabel('Predicted diagnosis', fontsize=fontsize)

    # ticks and tick labels
    ax1.set_xticks(range(len(class_names)))
    ax1.set_xticklabels(class_names, fontsize=fontsize)
    ax1.set_yticks(range(len(class_names)))
    ax1.set_yticklabels(class_names, fontsize=fontsize)

    fig.colorbar(image, ax=ax1)
    fig.tight_layout()

    return fig
