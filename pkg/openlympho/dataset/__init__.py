"""Patch records, raster input, synthetic corpora and splits."""

from .patch_defaults import *
from .patch_records import *
from .patch_raster import *
from .patch_synth import *
from .patch_split import *
