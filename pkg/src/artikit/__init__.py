"""Articulation error detection toolkit for synchronized
ultrasound-and-audio speech recordings."""

__version__ = "0.1.0"

from .classes import CLASSES, CLASS_INDEX, NUM_CLASSES

__all__ = ["CLASSES", "CLASS_INDEX", "NUM_CLASSES", "__version__"]
