"""Stacked-ensemble classification toolkit for histopathology feature maps.

Pipeline stages: serialize datasets to NPY bundles, expand training sets with
deterministic augmentation, concatenate per-extractor feature maps, fit one of
four classifier heads with grid search on the validation split, and curate the
resulting run records into a ranked leaderboard.
"""

__version__ = "0.1.0"
