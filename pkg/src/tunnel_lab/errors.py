"""Exception types raised by the numerical routines."""


class TunnelLabError(Exception):
    """Base class for all numerical failures in this package."""


class SingularityError(TunnelLabError, ValueError):
    """Evaluation requested at or beyond a pole of the drive on the imaginary axis."""


class NoRootError(TunnelLabError):
    """No sign change found for a root-finding problem."""


class NoBarrierError(TunnelLabError):
    """The potential never exceeds the energy on the probe grid."""


class NoExtremumError(TunnelLabError):
    """The photon-assisted exponent has no interior minimum (pulse too long)."""

    def __init__(self, message, delta_E=0.0, action=float("nan")):
        super().__init__(message)
        self.delta_E = delta_E
        self.action = action


class BranchTrackingError(TunnelLabError):
    """Square-root branch could not be followed continuously along a contour."""


class SaddleNotFoundError(TunnelLabError):
    """Newton iteration on the saddle-point condition failed from every seed."""


class ShootingDivergedError(TunnelLabError):
    """Two-parameter shooting did not meet its boundary conditions."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class TopologyError(TunnelLabError):
    """Fewer than two separated classically allowed regions were found."""


class MinimizationStalledError(TunnelLabError):
    """Path minimization hit its iteration limit before converging."""


class NoRootsError(TunnelLabError):
    """The turning-point equation along the wall has fewer than two roots."""


class RootOrderError(TunnelLabError):
    """Turning points came back in the wrong order for the requested side."""


class NoSignChangeError(TunnelLabError):
    """The enhanced exponent keeps one sign over the whole search range."""
