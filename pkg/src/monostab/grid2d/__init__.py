"""Uniform-grid domains, steady-state relaxation and dilation sweeps."""
