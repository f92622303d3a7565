"""msmlab: a pseudospectral laboratory for Schrodinger maps.

The package evolves maps from the periodic plane into the sphere or the
hyperbolic plane, transforms trajectories into covariant derivative fields
via a divergence-free gauge, solves the resulting dispersive system
directly, and measures the space-time norms and multilinear estimates that
control its regularity theory.
"""

__version__ = "0.1.0"

from .gauge import GaugeState, build_gauge_state, hasimoto_1d, verify_consistency
from .maps import MapField, MapTrajectory, Target, evolve, max_stable_dt
from .msm import MSMState, SolverConfig
from .spectral import Grid1D, Grid2D
from .xsb import MultiplierSpec, SpaceTimeField, multiplier_norm_bounds, xsb_norm

__all__ = [
    "GaugeState",
    "Grid1D",
    "Grid2D",
    "MapField",
    "MapTrajectory",
    "MSMState",
    "MultiplierSpec",
    "SolverConfig",
    "SpaceTimeField",
    "Target",
    "build_gauge_state",
    "evolve",
    "hasimoto_1d",
    "max_stable_dt",
    "multiplier_norm_bounds",
    "verify_consistency",
    "xsb_norm",
    "__version__",
]
