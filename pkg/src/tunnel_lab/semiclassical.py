"""
Semiclassical tunneling: imaginary-time trajectories and their actions.

Two families of problems live here.

* The Zener problem in dimensionless units (``fields``/``system``): tunneling
  time, exit point and action of the under-gap trajectory, the real-time
  classical path, and the validity checks of the trajectory method.
* Generic one-dimensional barriers (:class:`Potential1D`): the WKB exponent,
  the imaginary-time Newton trajectory solved as a boundary value problem, and
  the photon-assisted estimate that trades absorbed energy against a thinner
  barrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import NoBarrierError, NoExtremumError, NoRootError, ShootingDivergedError
from .fields import Drive, NO_DRIVE, drive_integral_closed, h_imag, h_real, imaginary_domain_edge
from .system import ZenerSystem

__all__ = [
    "ValidityFlags",
    "ActionBreakdown",
    "Potential1D",
    "Trajectory1D",
    "RealTrajectory",
    "PhotonAssistResult",
    "check_semiclassical",
    "tunneling_time",
    "exit_point",
    "action_integral",
    "closed_form_action",
    "real_time_trajectory",
    "static_trajectory",
    "wkb_action",
    "turning_points",
    "instanton_bvp",
    "photon_assist_extremum",
    "square_barrier",
    "parabolic_barrier",
    "gaussian_bump",
]


# --------------------------------------------------------------------------
# Zener problem
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidityFlags:
    """Semiclassical conditions, each with a factor-10 margin on "much less".

    ``large_g``: ``g >= 10``.  ``weak_field``: ``r <= 0.1``.
    ``resolved_pulse``: ``1/g <= 0.1 * theta**3 * r`` (steepest-descent width
    small compared to the pulse scale).
    """

    large_g: bool
    weak_field: bool
    resolved_pulse: bool

    @property
    def all(self) -> bool:
        return self.large_g and self.weak_field and self.resolved_pulse

    def as_columns(self) -> dict[str, bool]:
        return {"flag_eq16a": self.large_g, "flag_eq18a": self.weak_field, "flag_eq28": self.resolved_pulse}


def check_semiclassical(sys: ZenerSystem, drive: Drive = NO_DRIVE) -> ValidityFlags:
    large_g = sys.g >= 10.0
    if drive.is_null:
        return ValidityFlags(large_g, True, True)
    r = drive.amplitude_ratio
    return ValidityFlags(large_g, r <= 0.1, 1.0 / sys.g <= 0.1 * drive.width**3 * r)


@dataclass(frozen=True)
class ActionBreakdown:
    """Under-gap trajectory summary.

    ``action`` follows the convention ``A = 2 g int_0^tau0 sqrt(1 - P**2) dtau``
    with ``P = tau + I(tau)``; the factor two sits outside the integral
    (``prefactor`` records it) so the static value is ``pi g / 2``.
    ``exit_energy`` is in units of ``eps_g / 2``.
    """

    tau0: float
    x_exit: float
    action: float
    exit_energy: float
    conditions: ValidityFlags
    g: float
    prefactor: str = "2*g"


def tunneling_time(drive: Drive = NO_DRIVE, step: float = 1e-3, tol: float = 1e-10) -> float:
    """Smallest ``tau0 > 0`` with ``(tau0 + I(tau0))**2 = 1``.

    Grid scan with spacing ``step`` followed by bisection to ``tol``.  For the
    Lorentzian pulse the scan is cut just below the pole, at
    ``theta * (1 - 1e-9)``.

    Raises
    ------
    NoRootError
        If no sign change is found before the domain edge.
    """
    if drive.is_null:
        return 1.0
    edge = imaginary_domain_edge(drive)
    # a nonnegative drive only speeds up P(tau), so tau0 <= 1
    hi = min(1.0, edge * (1.0 - 1e-9))

    def phi(tau):
        return (tau + drive_integral_closed(drive, tau)) ** 2 - 1.0

    grid = np.append(np.arange(0.0, hi, step), hi)
    vals = phi(grid)
    idx = np.flatnonzero(vals >= 0.0)
    if idx.size == 0:
        raise NoRootError(f"no tunneling time below {hi} for {drive}")
    k = int(idx[0])
    if vals[k] == 0.0:
        return float(grid[k])
    return float(optimize.bisect(phi, grid[k - 1], grid[k], xtol=tol * 1e-3, rtol=1e-15, maxiter=200))


def _segment(drive: Drive, a: float, b: float) -> float:
    """``int_a^b h(i tau) dtau``, by quadrature for short spans and the primitive otherwise."""
    if drive.is_null or b <= a:
        return 0.0
    if b - a < 1e-3 * b:
        # differencing the primitive would cancel here
        return integrate.quad(lambda x: h_imag(drive, x), a, b, epsabs=1e-16, epsrel=1e-12, limit=200)[0]
    return drive_integral_closed(drive, b) - drive_integral_closed(drive, a)


def _gap(drive: Drive, tau0: float):
    """``D(tau) = 1 - P(tau) = (tau0 - tau) + int_tau^tau0 h(i s) ds`` (uses ``P(tau0) = 1``)."""

    def d(tau):
        return (tau0 - tau) + _segment(drive, tau, tau0)

    return d


def exit_point(drive: Drive = NO_DRIVE, tau0: float | None = None) -> float:
    """Coordinate where the trajectory leaves the gap.

    ``x_exit = 1 - 2 int_0^tau0 P h(i tau) / sqrt(1 - P**2) dtau``.  The
    inverse square root at ``tau0`` is removed by ``tau = tau0 - s**2``.
    """
    if drive.is_null:
        return 1.0
    if tau0 is None:
        tau0 = tunneling_time(drive)
    gap = _gap(drive, tau0)
    h0 = h_imag(drive, tau0)

    def integrand(s):
        if s == 0.0:
            # D ~ s**2 (1 + h(i tau0)) near the end point
            return h0 * 2.0 / math.sqrt(2.0 * (1.0 + h0))
        tau = tau0 - s * s
        d = gap(tau)
        return (1.0 - d) * h_imag(drive, tau) * 2.0 * s / math.sqrt(d * (2.0 - d))

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(tau0), epsabs=1e-14, epsrel=1e-11, limit=200)
    return 1.0 - 2.0 * val


def action_integral(drive: Drive = NO_DRIVE, g: float = 20.0) -> ActionBreakdown:
    """Tunneling action ``A = 2 g int_0^tau0 sqrt(1 - P(tau)**2) dtau``."""
    sys = ZenerSystem(g)
    tau0 = tunneling_time(drive)
    x_exit = exit_point(drive, tau0)
    gap = _gap(drive, tau0)

    def integrand(s):
        d = gap(tau0 - s * s)
        return math.sqrt(max(d * (2.0 - d), 0.0)) * 2.0 * s

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(tau0), epsabs=0.0, epsrel=1e-13, limit=200)
    return ActionBreakdown(
        tau0=tau0,
        x_exit=x_exit,
        action=2.0 * g * val,
        exit_energy=1.0 - x_exit,
        conditions=check_semiclassical(sys, drive),
        g=g,
    )


def closed_form_action(theta: float, g: float) -> float:
    """Singular-pulse limit of the action: the pulse only caps ``tau0`` at ``theta``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    if theta >= 1.0:
        return 0.5 * math.pi * g
    return g * (math.asin(theta) + theta * math.sqrt(1.0 - theta * theta))


@dataclass(frozen=True)
class RealTrajectory:
    t: np.ndarray
    x: np.ndarray
    velocity: np.ndarray


def static_trajectory(t, x_exit: float = 1.0):
    """Drive-free classical path outside the gap (incoming for t < 0, outgoing after)."""
    t = np.asarray(t, dtype=float)
    root = np.sqrt(1.0 + t * t)
    return np.where(t < 0, -root, x_exit + root - 1.0)


def real_time_trajectory(
    drive: Drive = NO_DRIVE,
    t_span: tuple[float, float] = (-5.0, 5.0),
    x_exit: float | None = None,
    n_samples: int = 501,
    rtol: float = 1e-9,
    t_eval=None,
) -> RealTrajectory:
    """Classical path ``x_cl(t)`` driven by ``1 + h(t)``.

    The particle arrives at ``x = -1`` at ``t = 0`` in the lower band and leaves
    from ``x_exit`` in the upper band; in each band
    ``dx/dt = +-P / sqrt(1 + P**2)`` with ``P = t + int_0^t h``.  Integrated
    with the Dormand-Prince 5(4) pair.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 <= t0:
        raise ValueError(f"bad t_span {t_span}")
    if x_exit is None:
        x_exit = exit_point(drive)
    ts = np.linspace(t0, t1, n_samples) if t_eval is None else np.asarray(t_eval, dtype=float)
    xs = np.empty_like(ts)
    vs = np.empty_like(ts)

    def rhs(sign):
        def f(t, y):
            p = t + y[1]
            return [sign * p / math.sqrt(1.0 + p * p), h_real(drive, t)]

        return f

    for mask, sign, x_start in ((ts < 0, -1.0, -1.0), (ts >= 0, 1.0, x_exit)):
        if not np.any(mask):
            continue
        sub = ts[mask]
        end = sub.min() if sign < 0 else sub.max()
        if end == 0.0:
            xs[mask] = x_start
            vs[mask] = 0.0
            continue
        sol = integrate.solve_ivp(
            rhs(sign), (0.0, end), [x_start, 0.0], method="RK45", rtol=rtol, atol=rtol * 1e-3, dense_output=True
        )
        y = sol.sol(sub)
        xs[mask] = y[0]
        p = sub + y[1]
        vs[mask] = sign * p / np.sqrt(1.0 + p * p)
    return RealTrajectory(ts, xs, vs)


# --------------------------------------------------------------------------
# Generic 1D barriers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Potential1D:
    """A barrier ``V(x)`` on the probe interval ``[x_min, x_max]``.

    ``x_well`` marks a narrow well at the left edge of the barrier: when
    ``V(x_well) > E`` the forbidden region starts there instead of at a
    turning point.  ``omega`` is the well frequency, kept only for the rough
    estimate ``A0 ~ V / (hbar omega)``.
    """

    V: Callable
    x_min: float
    x_max: float
    dV: Callable | None = None
    m: float = 1.0
    hbar: float = 1.0
    x_well: float | None = None
    omega: float | None = None
    name: str = "barrier"
    n_probe: int = 4001

    def force(self, x):
        """``dV/dx`` (analytic when supplied, central difference otherwise)."""
        if self.dV is not None:
            return self.dV(x)
        h = 1e-6 * max(1.0, abs(self.x_max - self.x_min))
        return (self.V(x + h) - self.V(x - h)) / (2.0 * h)

    @property
    def peak(self) -> float:
        xs = np.linspace(self.x_min, self.x_max, self.n_probe)
        return float(np.max(self.V(xs)))


def square_barrier(V0: float, L: float, x0: float = 0.0, edge: float = 0.0, m: float = 1.0, hbar: float = 1.0):
    """Barrier of height ``V0`` on ``[x0, x0 + L]``; ``edge > 0`` rounds the walls with tanh ramps."""
    pad = max(L, 10.0 * edge)
    if edge == 0.0:

        def V(x):
            x = np.asarray(x, dtype=float)
            return np.where((x > x0) & (x < x0 + L), V0, 0.0)

        dV = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    else:

        def V(x):
            x = np.asarray(x, dtype=float)
            return 0.5 * V0 * (np.tanh((x - x0) / edge) - np.tanh((x - x0 - L) / edge))

        def dV(x):
            x = np.asarray(x, dtype=float)
            return 0.5 * V0 / edge * (np.cosh((x - x0) / edge) ** -2 - np.cosh((x - x0 - L) / edge) ** -2)

    return Potential1D(V, x0 - pad, x0 + L + pad, dV=dV, m=m, hbar=hbar, name="square")


def parabolic_barrier(V0: float, omega: float, center: float = 0.0, m: float = 1.0, hbar: float = 1.0, half_width=None):
    """Inverted parabola ``V0 - m omega**2 (x - center)**2 / 2``."""
    if half_width is None:
        half_width = 1.5 * math.sqrt(2.0 * V0 / (m * omega * omega))

    def V(x):
        return V0 - 0.5 * m * omega**2 * (np.asarray(x, dtype=float) - center) ** 2

    def dV(x):
        return -m * omega**2 * (np.asarray(x, dtype=float) - center)

    return Potential1D(V, center - half_width, center + half_width, dV=dV, m=m, hbar=hbar, name="parabolic")


def gaussian_bump(V0: float, width: float, center: float = 0.0, m: float = 1.0, hbar: float = 1.0):
    """``V0 exp(-(x - center)**2 / (2 width**2))``."""

    def V(x):
        z = (np.asarray(x, dtype=float) - center) / width
        return V0 * np.exp(-0.5 * z * z)

    def dV(x):
        z = (np.asarray(x, dtype=float) - center) / width
        return -V0 * z / width * np.exp(-0.5 * z * z)

    return Potential1D(V, center - 8 * width, center + 8 * width, dV=dV, m=m, hbar=hbar, name="gaussian")


def turning_points(pot: Potential1D, E: float) -> tuple[float, float]:
    """Edges of the forbidden region that contains the barrier maximum."""
    xs = np.linspace(pot.x_min, pot.x_max, pot.n_probe)
    d = pot.V(xs) - E
    k = int(np.argmax(d))
    if d[k] < 0:
        raise NoBarrierError(f"V < E = {E} everywhere on [{pot.x_min}, {pot.x_max}]")
    if d[k] == 0:
        return float(xs[k]), float(xs[k])

    def f(x):
        return float(pot.V(x)) - E

    i = k
    while i > 0 and d[i - 1] > 0:
        i -= 1
    if pot.x_well is not None and xs[i] <= pot.x_well and f(pot.x_well) > 0:
        left = pot.x_well
    elif i == 0:
        left = float(xs[0])
    else:
        left = optimize.bisect(f, xs[i - 1], xs[i], xtol=1e-13, rtol=1e-15, maxiter=200)
    j = k
    while j < len(xs) - 1 and d[j + 1] > 0:
        j += 1
    right = float(xs[-1]) if j == len(xs) - 1 else optimize.bisect(f, xs[j], xs[j + 1], xtol=1e-13, rtol=1e-15, maxiter=200)
    return float(left), float(right)


def wkb_action(pot: Potential1D, E: float) -> float:
    """``A0(E) = (2/hbar) int sqrt(2 m (V - E)) dx`` across the barrier.

    The substitution ``x = xl + (xr - xl)(1 - cos u)/2`` removes the square-root
    zeros at both turning points.
    """
    xl, xr = turning_points(pot, E)
    if xr <= xl:
        return 0.0
    half = 0.5 * (xr - xl)

    def integrand(u):
        x = xl + half * (1.0 - math.cos(u))
        return math.sqrt(2.0 * pot.m * max(float(pot.V(x)) - E, 0.0)) * half * math.sin(u)

    val, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=1e-14, epsrel=1e-11, limit=400)
    return 2.0 * val / pot.hbar


@dataclass(frozen=True)
class Trajectory1D:
    """Imaginary-time path from the outer turning point (``tau = 0``) to the well (``tau = tau0``)."""

    grid: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    energy_residual: float
    tau0: float
    x_start: float
    boundary_residual: float = 0.0
    iterations: int = 0


def instanton_bvp(
    pot: Potential1D,
    drive: Drive = NO_DRIVE,
    E: float = 0.0,
    field_scale: float = 1.0,
    tol: float = 1e-11,
    max_iter: int = 200,
    n_samples: int = 401,
    guess: tuple[float, float] | None = None,
) -> tuple[Trajectory1D, float]:
    """Solve ``m x'' - V'(x) = -F h(i tau)`` with ``x'(0) = 0`` and ``x(tau0)`` at the well.

    Two-parameter shooting over ``(x(0), tau0)``.  The residuals are the miss
    distance at the well and the energy condition written through the first
    integral, ``V(x_w) - m x'(tau0)**2 / 2 = E``.  Steps come from a
    Levenberg-Marquardt solve on a finite-difference Jacobian and are halved
    while they increase the residual.

    The default starting point is the outer turning point and the drive-free
    crossing time; ``guess = (x0, tau0)`` overrides it.

    Returns the trajectory and the action
    ``(2/hbar) int_0^tau0 [m x'**2/2 + V(x) - x F h(i tau) - E] dtau``.
    """
    m = pot.m
    xl, xr = turning_points(pot, E)
    x_target = xl
    edge = imaginary_domain_edge(drive)

    def force_at(tau):
        return field_scale * h_imag(drive, tau) if not drive.is_null else 0.0

    def rhs(tau, y):
        x, v, _ = y
        fh = force_at(tau)
        return [v, (float(pot.force(x)) - fh) / m, 0.5 * m * v * v + float(pot.V(x)) - x * fh - E]

    def shoot(p, dense=False):
        x0, tau0 = p
        if not (tau0 > 0) or tau0 >= edge:
            return None
        sol = integrate.solve_ivp(
            rhs, (0.0, tau0), [x0, 0.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-13, dense_output=dense
        )
        if not sol.success:
            return None
        return sol

    scale_x = max(abs(xr - xl), 1e-12)
    e_scale = max(abs(pot.peak - E), 1e-12)

    def residual(p):
        sol = shoot(p)
        if sol is None:
            return None
        x, v, _ = sol.y[:, -1]
        r1 = (x - x_target) / scale_x
        r2 = (float(pot.V(x_target)) - 0.5 * m * v * v - E) / e_scale
        return np.array([r1, r2])

    # drive-free crossing time as the starting guess
    half = 0.5 * (xr - xl)

    def dtau(u):
        x = xl + half * (1.0 - math.cos(u))
        gap = float(pot.V(x)) - E
        return half * math.sin(u) / math.sqrt(2.0 * max(gap, 1e-300) / m) if gap > 0 else 0.0

    tau_guess, _ = integrate.quad(dtau, 0.0, math.pi, limit=400)
    if not math.isfinite(tau_guess) or tau_guess <= 0:
        raise ShootingDivergedError("could not estimate the crossing time")
    tau_guess = min(tau_guess, edge * (1 - 1e-6))
    p = np.array([xr, tau_guess]) if guess is None else np.array(guess, dtype=float)
    r = residual(p)
    if r is None:
        raise ShootingDivergedError("initial shot failed")
    mu = 1e-8
    it = 0
    for it in range(1, max_iter + 1):
        norm = float(np.linalg.norm(r))
        if norm < tol:
            break
        steps = np.array([1e-7 * scale_x, 1e-7 * max(p[1], 1e-3)])
        J = np.empty((2, 2))
        for k in range(2):
            dp = np.zeros(2)
            dp[k] = steps[k]
            rk = residual(p + dp)
            if rk is None:
                rk = residual(p - dp)
                dp = -dp
            if rk is None:
                raise ShootingDivergedError("shot failed while building the Jacobian", norm)
            J[:, k] = (rk - r) / dp[k]
        JtJ = J.T @ J
        step = -np.linalg.solve(JtJ + mu * np.diag(np.diag(JtJ) + 1e-300), J.T @ r)
        accepted = False
        for _ in range(60):
            trial = p + step
            rt = residual(trial)
            if rt is not None and np.linalg.norm(rt) < norm:
                p, r = trial, rt
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    else:
        it = max_iter
    norm = float(np.linalg.norm(r))
    if norm >= tol and (it >= max_iter or norm > 1e-6):
        raise ShootingDivergedError(f"shooting stopped at residual {norm:.3e} after {it} iterations", norm)

    sol = shoot(p, dense=True)
    grid = np.linspace(0.0, p[1], n_samples)
    y = sol.sol(grid)
    first_integral = pot.V(y[0]) - 0.5 * m * y[1] ** 2
    traj = Trajectory1D(
        grid=grid,
        positions=y[0],
        velocities=y[1],
        energy_residual=float(np.max(np.abs(first_integral - E))),
        tau0=float(p[1]),
        x_start=float(p[0]),
        boundary_residual=norm,
        iterations=it,
    )
    return traj, 2.0 * float(sol.y[2, -1]) / pot.hbar


@dataclass(frozen=True)
class PhotonAssistResult:
    delta_E: float
    action: float
    assisted: bool
    slope: float


def photon_assist_extremum(pot: Potential1D, E: float, theta: float, strict: bool = True) -> PhotonAssistResult:
    """Minimize ``A(dE) = 2 theta dE / hbar + A0(E + dE)`` over ``0 <= dE < max V - E``.

    A minimum away from ``dE = 0`` needs ``2 theta < hbar |dA0/dE|`` at ``E``.
    When it fails, :class:`NoExtremumError` carrying ``delta_E = 0`` and
    ``A0(E)`` is raised, or with ``strict=False`` that static result is
    returned with ``assisted=False``.

    For barriers whose ``A0(E)`` is concave (square, for instance) the
    stationary point is a maximum and the minimum sits at the barrier top.
    """
    top = pot.peak - E
    if top <= 0:
        raise NoBarrierError("energy above the barrier")
    h = 1e-5 * top
    slope = (wkb_action(pot, E + h) - wkb_action(pot, E - h)) / (2.0 * h)
    a0 = wkb_action(pot, E)
    if not 2.0 * theta < pot.hbar * abs(slope):
        if strict:
            raise NoExtremumError("pulse too long for photon assistance", 0.0, a0)
        return PhotonAssistResult(0.0, a0, False, slope)

    def total(de):
        return 2.0 * theta * de / pot.hbar + wkb_action(pot, E + de)

    res = optimize.minimize_scalar(
        total, bounds=(0.0, top * (1 - 1e-12)), method="bounded", options={"xatol": 1e-12 * top, "maxiter": 500}
    )
    return PhotonAssistResult(float(res.x), float(res.fun), True, slope)
