"""Top-level package for OpenLympho."""

import openlympho.core as core
import openlympho.dataset as dataset
import openlympho.model as model
import openlympho.evaluator as evaluator
import openlympho.plot as plot

__author__ = """OpenLympho developers"""
__version__ = 'v0.1.0'
__all__ = ["core", "dataset", "model", "evaluator", "plot"]
