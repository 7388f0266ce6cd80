"""Transition labeling of measured points."""

from .labeler import LabelConfig, LabeledSet, assign, label_points, simulated_table

__all__ = ["LabelConfig", "LabeledSet", "assign", "label_points", "simulated_table"]
