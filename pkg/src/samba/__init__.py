"""Trainable segmentation engine.

Sparse user labels + a per-pixel filter-bank feature stack train a random
forest that segments the whole image, with per-pixel uncertainty and
promptable smart-label mask suggestions. See README.md for the CLI and the
HTTP service.
"""

__version__ = "0.1.0"
