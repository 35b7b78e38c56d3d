"""Desk-scale on-policy driving: synthetic road world, two data-driven
simulators (depth reprojection and a learned latent world model), and the
training/evaluation stack that compares off-policy and on-policy policies."""

__version__ = "0.1.0"
