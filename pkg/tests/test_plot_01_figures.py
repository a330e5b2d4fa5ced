
"""Tests for `openlympho` package."""


def test_plot_01_history_and_confusion(tmp_path):
	"""Both figures render and save"""
	import matplotlib
	matplotlib.use('Agg')
	import matplotlib.pyplot as plt
	import pandas as pd
	from openlympho.evaluator import confusion
	from openlympho.model import history_columns
	from openlympho.plot import history_plot, confusion_plot

	history = pd.DataFrame([[1, 0.01, 1.2, 0.4, 1.3, 0.35], [2, 0.01, 0.8, 0.7, 0.9, 0.65]], columns=history_columns)

	fig = history_plot(history, best_epoch=2)
	fig.savefig(tmp_path / 'history.png')
	assert len(fig.axes) == 2

	fig = confusion_plot(confusion([(0, 0), (1, 1), (2, 1), (3, 3)]), title='Set-by-set')
	fig.savefig(tmp_path / 'confusion.png')
	assert '3/4=75%' in fig.axes[0].get_title()
	assert (tmp_path / 'history.png').stat().st_size > 0 and (tmp_path / 'confusion.png').stat().st_size > 0
	plt.close('all')

	empty = confusion_plot(confusion([]))
	assert 'n/a' in empty.axes[0].get_title()
	plt.close('all')
