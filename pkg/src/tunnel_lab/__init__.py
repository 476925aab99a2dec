"""Tunneling in nonstationary fields: exact Zener model, imaginary-time
trajectories, and enhanced tunneling through two-dimensional barriers."""

from .errors import (
    BranchTrackingError,
    MinimizationStalledError,
    NoBarrierError,
    NoExtremumError,
    NoRootError,
    NoRootsError,
    NoSignChangeError,
    RootOrderError,
    SaddleNotFoundError,
    ShootingDivergedError,
    SingularityError,
    TopologyError,
    TunnelLabError,
)
from .fields import NO_DRIVE, Drive, Shape
from .system import ZenerSystem

__version__ = "0.1.0"

__all__ = [
    "Drive",
    "Shape",
    "NO_DRIVE",
    "ZenerSystem",
    "TunnelLabError",
    "SingularityError",
    "NoRootError",
    "NoBarrierError",
    "NoExtremumError",
    "BranchTrackingError",
    "SaddleNotFoundError",
    "ShootingDivergedError",
    "TopologyError",
    "MinimizationStalledError",
    "NoRootsError",
    "RootOrderError",
    "NoSignChangeError",
]
