"""Exact L2 operator norms of the volte-face telegraph process on the circle.

Submodules are imported lazily by their users; the names below are the
entry points most callers want.
"""
from ._core import BACKEND
from .discrete_chain import ChainSpec, discrete_global_norm, discrete_mode_norm
from .global_norm import asymptotic_rate, envelope_g, global_operator_norm
from .mode_core import DomainError, mode_norm_squared_closed, mode_norm_squared_oracle
from .potential_geometry import Potential, norm_with_potential

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChainSpec",
    "DomainError",
    "Potential",
    "asymptotic_rate",
    "discrete_global_norm",
    "discrete_mode_norm",
    "envelope_g",
    "global_operator_norm",
    "mode_norm_squared_closed",
    "mode_norm_squared_oracle",
    "norm_with_potential",
]
