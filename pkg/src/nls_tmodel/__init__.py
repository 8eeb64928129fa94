"""Pseudospectral 1D critical focusing NLS: full Galerkin system, t-model
reduced system, adaptive RKF45 integration and post-singularity diagnostics."""

__version__ = "0.1.0"
