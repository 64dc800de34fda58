"""Tune the rotation angles of a fixed 2^n-fold repetitive circuit so it
reproduces an arbitrary n-qubit unitary."""

from .kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
