"""Directory for the training and evaluation plots."""

from .plot import history_plot, confusion_plot

__all__ = ["history_plot", "confusion_plot"]
