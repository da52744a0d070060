"""Spectral sums of weighted point sets on tori and the 2-sphere, with the radial-transform kernels behind
their lower bound and quadrature audits."""

__version__ = "0.1.0"
