"""Weighted sum-rate power control under latent interference.

WMMSE baselines and an SC-WMMSE variant whose receive updates sometimes
use a synthetic-control estimate of the interference instead of the
measured value.
"""
__version__ = "0.1.0"
