"""
Nonstationary field profiles in dimensionless units.

Time is measured in units of the tunneling time ``t0`` and the field in units
of the static field, so a drive is fully described by its shape, the ratio
``r`` of its amplitude to the static field and one width parameter:

* ``LORENTZIAN_CUBED``: ``h(t) = r / (1 + t**2/theta**2)**3`` (``width = theta``)
* ``COSINE``:           ``h(t) = r cos(Omega t)``            (``width = Omega``)
* ``GAUSSIAN``:         ``h(t) = r exp(-Omega**2 t**2)``      (``width = Omega``)

All shapes are even in ``t``, so on the imaginary axis ``h(i tau)`` is real.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import SingularityError

__all__ = [
    "Shape",
    "Drive",
    "NO_DRIVE",
    "h_real",
    "h_imag",
    "h_complex",
    "antiderivative",
    "drive_integral",
    "drive_integral_closed",
    "fourier_component",
    "imaginary_domain_edge",
]


class Shape(str, enum.Enum):
    NONE = "none"
    LORENTZIAN_CUBED = "lorentzian_cubed"
    COSINE = "cosine"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class Drive:
    """A symmetric field pulse ``h(t) = E(t)/E0``.

    Parameters
    ----------
    shape : Shape
        Pulse family.
    amplitude_ratio : float
        Peak field over static field, ``r >= 0``.
    width : float
        ``theta/t0`` for the Lorentzian pulse, ``Omega*t0`` otherwise.
    """

    shape: Shape = Shape.NONE
    amplitude_ratio: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if not self.amplitude_ratio >= 0.0:
            raise ValueError(f"amplitude_ratio must be >= 0, got {self.amplitude_ratio}")
        if not self.width > 0.0:
            raise ValueError(f"width must be > 0, got {self.width}")

    @property
    def is_null(self) -> bool:
        return self.shape is Shape.NONE or self.amplitude_ratio == 0.0

    def poles(self) -> list[complex]:
        """Singular points of ``h(s)`` in the complex time plane."""
        if self.shape is Shape.LORENTZIAN_CUBED and not self.is_null:
            return [1j * self.width, -1j * self.width]
        return []


NO_DRIVE = Drive()


def imaginary_domain_edge(drive: Drive) -> float:
    """Largest ``tau`` for which ``h(i tau)`` is finite (``inf`` for entire shapes)."""
    if drive.shape is Shape.LORENTZIAN_CUBED and not drive.is_null:
        return drive.width
    return math.inf


def h_complex(drive: Drive, s):
    """``h(s)`` for complex (or real) arguments, vectorized."""
    s = np.asarray(s)
    if drive.is_null:
        return np.zeros_like(s, dtype=np.result_type(s, float))
    r, w = drive.amplitude_ratio, drive.width
    if drive.shape is Shape.LORENTZIAN_CUBED:
        z = s / w
        return r / (1.0 + z * z) ** 3
    if drive.shape is Shape.COSINE:
        return r * np.cos(w * s)
    return r * np.exp(-(w * s) ** 2)


def antiderivative(drive: Drive, s):
    """``H(s) = int_0^s h(s') ds'`` continued analytically off the real axis.

    The Lorentzian primitive contains ``arctan``; its principal cuts run along
    the imaginary axis beyond the poles ``s = +-i*theta``.
    """
    s = np.asarray(s)
    if drive.is_null:
        return np.zeros_like(s, dtype=np.result_type(s, float))
    r, w = drive.amplitude_ratio, drive.width
    if drive.shape is Shape.LORENTZIAN_CUBED:
        z = s / w
        q = 1.0 + z * z
        return r * w * (z / (4.0 * q * q) + 3.0 * z / (8.0 * q) + 0.375 * np.arctan(z))
    if drive.shape is Shape.COSINE:
        return r * np.sin(w * s) / w
    return r * math.sqrt(math.pi) / (2.0 * w) * special.erf(w * s)


def h_real(drive: Drive, t):
    """Field ratio ``E(t)/E0`` on the real time axis."""
    t = np.asarray(t, dtype=float)
    out = h_complex(drive, t)
    return float(out) if out.ndim == 0 else out


def h_imag(drive: Drive, tau):
    """``h(i tau)``, which is real for every symmetric shape.

    Raises
    ------
    SingularityError
        For the Lorentzian pulse when ``tau >= theta`` (pole at ``tau = theta``).
    """
    tau = np.asarray(tau, dtype=float)
    if drive.is_null:
        out = np.zeros_like(tau)
        return float(out) if out.ndim == 0 else out
    r, w = drive.amplitude_ratio, drive.width
    if drive.shape is Shape.LORENTZIAN_CUBED:
        if np.any(np.abs(tau) >= w):
            raise SingularityError(f"h(i tau) has a pole at tau = {w}; got tau up to {np.max(np.abs(tau))}")
        out = r / (1.0 - (tau / w) ** 2) ** 3
    elif drive.shape is Shape.COSINE:
        out = r * np.cosh(w * tau)
    else:
        out = r * np.exp((w * tau) ** 2)
    return float(out) if out.ndim == 0 else out


def drive_integral(drive: Drive, tau: float, rtol: float = 1e-10) -> float:
    """Running integral ``I(tau) = int_0^tau h(i tau1) d tau1``.

    Adaptive quadrature at relative tolerance ``rtol``; diverges as ``tau``
    approaches the Lorentzian pole.
    """
    tau = float(tau)
    if drive.is_null or tau == 0.0:
        return 0.0
    if abs(tau) >= imaginary_domain_edge(drive):
        raise SingularityError(f"tau = {tau} outside the analytic domain of {drive.shape.value}")
    val, _ = integrate.quad(lambda x: h_imag(drive, x), 0.0, tau, epsabs=0.0, epsrel=rtol, limit=200)
    return val


def drive_integral_closed(drive: Drive, tau):
    """``I(tau)`` from the analytic primitive; vectorized.

    Used by the root finders, where the adaptive quadrature of
    :func:`drive_integral` would be re-run thousands of times and loses
    accuracy right next to the Lorentzian pole.
    """
    tau = np.asarray(tau, dtype=float)
    if drive.is_null:
        out = np.zeros_like(tau)
        return float(out) if out.ndim == 0 else out
    r, w = drive.amplitude_ratio, drive.width
    if drive.shape is Shape.LORENTZIAN_CUBED:
        if np.any(np.abs(tau) >= w):
            raise SingularityError(f"tau = {np.max(np.abs(tau))} outside the analytic domain |tau| < {w}")
        z = tau / w
        q = (1.0 - z) * (1.0 + z)
        out = r * w * (z / (4.0 * q * q) + 3.0 * z / (8.0 * q) + 0.375 * np.arctanh(z))
    elif drive.shape is Shape.COSINE:
        out = r * np.sinh(w * tau) / w
    else:
        out = r * math.sqrt(math.pi) / (2.0 * w) * special.erfi(w * tau)
    return float(out) if out.ndim == 0 else out


def fourier_component(drive: Drive, omega: float) -> float:
    """Cosine transform ``int h(t) cos(omega t) dt`` over the whole real line.

    The cosine drive has a line spectrum; for it the line weight ``r/2`` is
    returned at ``omega = +-Omega`` and zero elsewhere.
    """
    omega = abs(float(omega))
    if drive.is_null:
        return 0.0
    if drive.shape is Shape.COSINE:
        return 0.5 * drive.amplitude_ratio if math.isclose(omega, drive.width, rel_tol=1e-12) else 0.0

    def f(t):
        return h_complex(drive, t)

    with warnings.catch_warnings():
        # roundoff warnings fire once the requested tolerance is below the attainable one
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if drive.shape is Shape.GAUSSIAN:
            upper = 7.0 / drive.width  # tail below exp(-49) of the peak
            val, _ = integrate.quad(f, 0.0, upper, weight="cos", wvar=omega, epsabs=0.0, epsrel=1e-12, limit=400)
        elif omega == 0.0:
            val, _ = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
        else:
            # QAWF only honours an absolute tolerance; keep it far below the tail value
            val, _ = integrate.quad(f, 0.0, np.inf, weight="cos", wvar=omega, epsabs=1e-300, limlst=200)
    return 2.0 * val
