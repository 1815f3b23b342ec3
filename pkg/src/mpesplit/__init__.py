"""Multi-product operator splitting integrators of arbitrary even and odd order."""

__version__ = "0.1.0"
