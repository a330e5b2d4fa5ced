"""Image and set scoring of trained networks."""

from .evaluation import *
