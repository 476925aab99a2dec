"""
Normal and enhanced tunneling exponents for static two-dimensional barriers.

The potential is ``V(x, y) = Vx(x) + Vy(y) + Vint(x, y; lam)`` on the strip
``x >= x0``.  A hard wall at ``x0`` closes a well whose bound level ``E`` is an
input; the particle also moves along ``y`` with energy ``eps``, so the total
energy is ``E0 = E + eps``.

* Region A is the well.  Along the wall it occupies the topmost ``y`` band
  where ``Vy + Vint(x0, y) <= eps``, plus any allowed pocket attached to it.
* Region B is the allowed region reaching the far edge ``x_max``.

The normal exponent is the minimum of the Maupertuis-Jacobi length
``(2/hbar) int sqrt(2 m (V - E0)) dl`` over paths from A to B.  The enhanced
channel first crosses the forbidden ``y`` interval ``[y0, y1]`` along the
wall, which contributes the real phase ``X``, and then tunnels from the point
``f = (x0, y0)`` to B: ``A1 = A0(f -> B) - 2 X``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, ndimage, optimize
from skimage import measure

from .errors import MinimizationStalledError, NoRootsError, NoSignChangeError, RootOrderError, TopologyError

__all__ = [
    "Barrier2D",
    "Regions",
    "JacobiPath",
    "EnhancedResult",
    "ResonanceResult",
    "reference_barrier",
    "equipotential_regions",
    "wall_roots",
    "minimal_path",
    "normal_action",
    "sigma_phase",
    "enhanced_action",
    "resonance_search",
]

log = logging.getLogger(__name__)

_GL_S, _GL_W = leggauss(8)
_GL_S = 0.5 * (_GL_S + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class Barrier2D:
    """Separable-plus-interaction potential with a hard wall at ``x0``.

    Parameters
    ----------
    Vx, Vy : callable
        One-dimensional parts, vectorized.  ``Vx`` is the barrier for ``x > x0``.
    Vint : callable
        ``Vint(x, y, lam)``, vectorized and smooth for ``x > x0``.
    lam : float
        Coupling constant passed to ``Vint``.
    E : float
        Bound level of the well (an input, not solved for).
    eps : float
        Energy of the motion along ``y``; ``E0 = E + eps``.
    x0, x_max, y_min, y_max : float
        Computational strip.  B must be allowed at ``x_max``.

    Notes
    -----
    Derivatives of ``V`` use the complex step when the callables accept
    complex arguments, and central differences otherwise.
    """

    Vx: Callable
    Vy: Callable
    Vint: Callable
    lam: float
    E: float
    eps: float
    x0: float
    x_max: float
    y_min: float
    y_max: float
    m: float = 1.0
    hbar: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not (self.x_max > self.x0 and self.y_max > self.y_min):
            raise ValueError("empty computational strip")
        if not (self.m > 0 and self.hbar > 0):
            raise ValueError("m and hbar must be positive")

    @property
    def E0(self) -> float:
        return self.E + self.eps

    def V(self, x, y):
        return self.Vx(x) + self.Vy(y) + self.Vint(x, y, self.lam)

    def wall_potential(self, y):
        """``Vy(y) + Vint(x0, y)``: the potential of the motion along the wall."""
        return self.Vy(y) + self.Vint(self.x0, y, self.lam)

    def grad(self, x, y):
        """``(dV/dx, dV/dy)``, vectorized."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = 1e-30
        try:
            gx = np.imag(self.V(x + 1j * h, y)) / h
            gy = np.imag(self.V(x, y + 1j * h)) / h
            if np.all(np.isfinite(gx)) and np.all(np.isfinite(gy)):
                return gx, gy
        except (TypeError, ValueError):
            pass
        hx = 1e-6 * np.maximum(1.0, np.abs(x))
        hy = 1e-6 * np.maximum(1.0, np.abs(y))
        gx = (self.V(x + hx, y) - self.V(x - hx, y)) / (2 * hx)
        gy = (self.V(x, y + hy) - self.V(x, y - hy)) / (2 * hy)
        return gx, gy

    def with_params(self, **kw) -> "Barrier2D":
        return replace(self, **kw)


def reference_barrier(lam: float = 1.0, eps: float = 0.5) -> Barrier2D:
    """The shipped reference barrier.

    ``Vx = 4 - (x - 1.5)**2`` (wall at 0, ``E = 1``), ``Vy = y**2 / 8`` and a
    Gaussian bump ``lam exp(-2 x**2) exp(-2 y**2)`` centred on the wall.  For
    ``lam > eps`` the bump splits the wall motion into two pockets separated by
    a forbidden interval, which is the geometry of the enhanced channel.
    """

    def Vx(x):
        return 4.0 - (x - 1.5) ** 2

    def Vy(y):
        return 0.125 * y * y

    def Vint(x, y, lam):
        return lam * np.exp(-2.0 * x * x) * np.exp(-2.0 * y * y)

    return Barrier2D(Vx, Vy, Vint, lam=lam, E=1.0, eps=eps, x0=0.0, x_max=5.0, y_min=-4.0, y_max=4.0, name="reference")


# --------------------------------------------------------------------------
# roots along the wall
# --------------------------------------------------------------------------


def _wall_roots_all(b: Barrier2D, n: int = 8001) -> list[tuple[float, str]]:
    """Zeros of ``Vy + Vint(x0, .) - eps`` as ``(y, kind)``, kind in {"cross", "touch"}."""
    ys = np.linspace(b.y_min, b.y_max, n)
    f = b.wall_potential(ys) - b.eps

    def fun(y):
        return float(b.wall_potential(y) - b.eps)

    scale = max(1.0, float(np.max(np.abs(f))))
    out = []
    for i in range(n - 1):
        if f[i] == 0.0 and 0 < i and f[i - 1] * f[i + 1] < 0:
            out.append((float(ys[i]), "cross"))
        elif f[i] * f[i + 1] < 0:
            out.append((optimize.brentq(fun, ys[i], ys[i + 1], xtol=1e-14, rtol=1e-15), "cross"))
    # tangential zeros: local extrema of f that reach zero within round-off
    for i in range(1, n - 1):
        if abs(f[i]) >= abs(f[i - 1]) or abs(f[i]) > abs(f[i + 1]):
            continue
        ref = f[i] if f[i] != 0.0 else f[i - 1]
        sgn = 1.0 if ref >= 0 else -1.0
        if f[i - 1] * sgn <= 0 or f[i + 1] * sgn <= 0:
            continue
        res = optimize.minimize_scalar(lambda y: sgn * fun(y), bounds=(ys[i - 1], ys[i + 1]), method="bounded", options={"xatol": 1e-12})
        if abs(fun(res.x)) <= 1e-10 * scale:
            out.append((float(res.x), "touch"))
    return sorted(out)


def wall_roots(b: Barrier2D) -> tuple[float, float, tuple[float, float]]:
    """``(y0, y1, band)``: the forbidden interval below region A and A's band on the wall.

    ``y1`` is the lower edge of the topmost allowed band ``band = (y1, y_up)``;
    ``y0`` is the next root below it.  A tangential zero gives ``y0 = y1``.

    Raises
    ------
    NoRootsError
        If the allowed band has no lower edge or nothing lies below it.
    """
    roots = _wall_roots_all(b)
    f = lambda y: float(b.wall_potential(y) - b.eps)  # noqa: E731
    for j in range(len(roots) - 1, -1, -1):
        y, kind = roots[j]
        above = roots[j + 1][0] if j + 1 < len(roots) else b.y_max
        if kind == "touch":
            allowed_above = f(0.5 * (y + above)) <= 0.0
            if allowed_above or all(f(v) >= 0 for v in np.linspace(y, above, 9)[1:]):
                return y, y, (y, above if allowed_above else y)
            continue
        if f(0.5 * (y + above)) < 0.0:
            if j == 0:
                raise NoRootsError(f"no root of the wall equation below y1 = {y}")
            if j > 1:
                log.info("wall equation has %d roots below y1; using the adjacent one", j)
            return roots[j - 1][0], y, (y, above)
    raise NoRootsError("the wall equation Vy + Vint(x0, y) = eps has no root bounding an allowed band")


def _a_band(b: Barrier2D) -> tuple[float, float]:
    """``y`` range along the wall that belongs to region A."""
    try:
        return wall_roots(b)[2]
    except NoRootsError:
        ys = np.linspace(b.y_min, b.y_max, 8001)
        ok = b.wall_potential(ys) - b.eps <= 0.0
        if np.all(ok):
            return b.y_min, b.y_max
        if not np.any(ok):
            raise TopologyError("the wall motion is classically forbidden everywhere") from None
        # topmost allowed band reaching down to the strip edge
        idx = np.flatnonzero(ok)
        top = idx[-1]
        lo = top
        while lo > 0 and ok[lo - 1]:
            lo -= 1
        hi = ys[top] if top == len(ys) - 1 else optimize.brentq(lambda y: b.wall_potential(y) - b.eps, ys[top], ys[top + 1])
        return float(ys[lo]), float(hi)


# --------------------------------------------------------------------------
# level sets
# --------------------------------------------------------------------------


@dataclass
class Regions:
    """Classically allowed regions and their ``V = E0`` boundaries.

    Attributes
    ----------
    xs, ys : ndarray
        Final grid.
    labels : ndarray
        Connected components of ``V < E0`` on the grid (``labels[j, i]`` at
        ``(xs[i], ys[j])``).
    a_labels, b_labels : set of int
        Components attached to the well band and to the far edge.
    a_curves, b_curves : list of ndarray
        Level-set polylines (``(n, 2)`` arrays of ``(x, y)``) bounding A and B.
    wall_band : tuple
        ``y`` interval of region A on the wall.
    shift : float
        Largest boundary displacement in the last grid doubling.
    """

    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray
    a_labels: set
    b_labels: set
    a_curves: list
    b_curves: list
    wall_band: tuple
    shift: float


def _extract(b: Barrier2D, nx: int, ny: int, band):
    xs = np.linspace(b.x0, b.x_max, nx)
    ys = np.linspace(b.y_min, b.y_max, ny)
    X, Y = np.meshgrid(xs, ys)
    D = b.V(X, Y) - b.E0
    allowed = D < 0
    labels, _ = ndimage.label(allowed)
    right = set(np.unique(labels[:, -1])) - {0}
    in_band = (ys >= band[0]) & (ys <= band[1])
    left = set(np.unique(labels[in_band, 0])) - {0}
    if not right:
        raise TopologyError("no classically allowed region reaches the far edge x_max")
    if left & right:
        raise TopologyError("the well and the far region are connected: no barrier at this energy")
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    a_curves, b_curves = [], []
    for c in measure.find_contours(D, 0.0):
        pts = np.column_stack([xs[0] + c[:, 1] * dx, ys[0] + c[:, 0] * dy])
        # label of the allowed cells next to the middle vertex
        j, i = np.round(c[len(c) // 2]).astype(int)
        win = labels[max(j - 1, 0) : j + 2, max(i - 1, 0) : i + 2]
        found = set(np.unique(win)) - {0}
        if found & right:
            b_curves.append(pts)
        elif found & left:
            a_curves.append(pts)
    return xs, ys, labels, left, right, a_curves, b_curves


def _polyline_distance(p: np.ndarray, curves: list) -> np.ndarray:
    """Distance from each point of ``p`` to the union of polylines."""
    best = np.full(len(p), np.inf)
    for c in curves:
        a, d = c[:-1], np.diff(c, axis=0)
        L2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
        for k in range(0, len(p), 512):
            q = p[k : k + 512, None, :]
            s = np.clip(np.sum((q - a) * d, axis=2) / L2, 0.0, 1.0)
            r = q - (a + s[..., None] * d)
            best[k : k + 512] = np.minimum(best[k : k + 512], np.sqrt(np.min(np.sum(r * r, axis=2), axis=1)))
    return best


def equipotential_regions(b: Barrier2D, n0: int = 129, tol: float = 1e-3, max_n: int = 2049) -> Regions:
    """Extract the ``V = E0`` boundaries of A and B by marching squares.

    The grid is doubled until the boundary points move by less than ``tol``
    between two consecutive grids.

    Raises
    ------
    TopologyError
        If region A or B is missing, or the two are connected.
    """
    band = _a_band(b)
    n = n0
    prev = _extract(b, n, n, band)
    shift = math.inf
    while n < max_n:
        n = 2 * n - 1
        cur = _extract(b, n, n, band)
        old = prev[5] + prev[6]
        new = cur[5] + cur[6]
        if old and new:
            shift = float(max(np.max(_polyline_distance(c, new)) for c in old))
        else:
            shift = 0.0 if not old and not new else math.inf
        prev = cur
        if shift < tol:
            break
    xs, ys, labels, left, right, a_curves, b_curves = prev
    return Regions(xs, ys, labels, left, right, a_curves, b_curves, band, shift)


# --------------------------------------------------------------------------
# Jacobi-length minimization
# --------------------------------------------------------------------------


def _x_boundary_B(b: Barrier2D, y: float, n: int = 801) -> float:
    """Left edge of region B on the horizontal line through ``y``."""
    xs = np.linspace(b.x0, b.x_max, n)
    d = b.V(xs, np.full(n, y)) - b.E0
    if d[-1] >= 0:
        raise TopologyError(f"region B does not reach x_max at y = {y}")
    k = np.flatnonzero(d >= 0)
    if len(k) == 0:
        raise TopologyError(f"no forbidden region on the line y = {y}")
    k = k[-1]
    return optimize.brentq(lambda x: float(b.V(x, y) - b.E0), xs[k], xs[k + 1], xtol=1e-14, rtol=1e-15)


def _x_boundary_A(b: Barrier2D, y: float, n: int = 801) -> tuple[float, bool]:
    """Right edge of region A at height ``y``: the wall, or the pocket boundary."""
    if float(b.V(b.x0, y)) >= b.E0:
        return b.x0, False
    xs = np.linspace(b.x0, b.x_max, n)
    d = b.V(xs, np.full(n, y)) - b.E0
    k = np.flatnonzero(d >= 0)
    if len(k) == 0:
        raise TopologyError(f"no forbidden region on the line y = {y}")
    k = k[0]
    return optimize.brentq(lambda x: float(b.V(x, y) - b.E0), xs[k - 1], xs[k], xtol=1e-14, rtol=1e-15), True


def _slope(b: Barrier2D, x: float, y: float) -> float:
    """``dx/dy`` along the level set through ``(x, y)``."""
    gx, gy = b.grad(x, y)
    return float(-gy / gx)


@dataclass
class JacobiPath:
    """A converged minimal path.

    Attributes
    ----------
    nodes : ndarray
        ``(n, 2)`` array of ``(x, y)`` nodes from the start to region B.
    action : float
        ``(2/hbar) int sqrt(2 m (V - E0)) dl`` along the polyline.
    iterations : int
        Optimizer iterations.
    grad_norm : float
        Largest projected gradient component at the end.
    start_angle, end_angle : float
        Angle in degrees between the path and the boundary it meets (the wall
        or a level set); ``nan`` for a pinned start.
    """

    nodes: np.ndarray
    action: float
    iterations: int
    grad_norm: float
    start_angle: float
    end_angle: float
    start_on_level_set: bool = field(default=False)


def _jacobi(b: Barrier2D, P: np.ndarray):
    """Action of the polyline ``P`` and its gradient with respect to the nodes."""
    A = P[:-1]
    D = np.diff(P, axis=0)
    L = np.sqrt(np.sum(D * D, axis=1))
    nseg = len(D)
    S = np.tile(_GL_S, (nseg, 1))
    Wt = np.tile(_GL_W, (nseg, 1))
    # square-root zeros at the ends: s = u**2 and s = 1 - u**2
    S[0], Wt[0] = _GL_S**2, 2.0 * _GL_S * _GL_W
    S[-1], Wt[-1] = 1.0 - _GL_S**2, 2.0 * _GL_S * _GL_W
    X = A[:, None, 0] + S * D[:, None, 0]
    Y = A[:, None, 1] + S * D[:, None, 1]
    dv = np.maximum(b.V(X, Y) - b.E0, 0.0)
    phi = np.sqrt(2.0 * b.m * dv)
    gx, gy = b.grad(X, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(phi > 0, b.m / phi, 0.0)
    px, py = gx * inv, gy * inv
    I = np.sum(Wt * phi, axis=1)
    c = 2.0 / b.hbar
    J = c * float(np.sum(L * I))
    e = D / np.maximum(L, 1e-300)[:, None]
    ga = np.empty_like(D)
    gb = np.empty_like(D)
    ga[:, 0] = -e[:, 0] * I + L * np.sum(Wt * (1 - S) * px, axis=1)
    ga[:, 1] = -e[:, 1] * I + L * np.sum(Wt * (1 - S) * py, axis=1)
    gb[:, 0] = e[:, 0] * I + L * np.sum(Wt * S * px, axis=1)
    gb[:, 1] = e[:, 1] * I + L * np.sum(Wt * S * py, axis=1)
    G = np.zeros_like(P)
    G[:-1] += ga
    G[1:] += gb
    return J, c * G


def _angle(u, v) -> float:
    c = abs(u[0] * v[0] + u[1] * v[1]) / (math.hypot(*u) * math.hypot(*v))
    return math.degrees(math.acos(min(1.0, c)))


def minimal_path(
    b: Barrier2D,
    start: tuple[float, float] | None = None,
    n_nodes: int = 64,
    init: np.ndarray | None = None,
    seed: int | None = None,
    gtol: float = 1e-8,
    max_iter: int = 10_000,
) -> JacobiPath:
    """Minimize the Jacobi length from region A (or a pinned point) to region B.

    The path is a graph ``y(x)``: ``n_nodes`` nodes equally spaced in ``x``
    between the start and the end, whose ``y`` values are free.  Both end
    points slide: the start along A's band on the wall (or along its pocket
    boundary), the end along B's boundary.  A pinned ``start`` keeps only
    the end sliding.  The objective is minimized by L-BFGS-B, which projects
    the start onto the band.

    Parameters
    ----------
    init : ndarray, optional
        Initial ``y`` values of all nodes (length ``n_nodes``).
    seed : int, optional
        Adds a smooth random perturbation to the straight initial path.

    Raises
    ------
    MinimizationStalledError
        If the projected gradient is still above ``gtol`` after ``max_iter``
        iterations.
    """
    if n_nodes < 3:
        raise ValueError("need at least three nodes")
    N = n_nodes - 1
    frac = np.arange(n_nodes) / N
    pinned = start is not None
    if pinned:
        lo = hi = float(start[1])
    else:
        lo, hi = _a_band(b)

    def ends(ys, y_end):
        if pinned:
            xs0, on_level = float(start[0]), False
        else:
            xs0, on_level = _x_boundary_A(b, ys)
        return xs0, on_level, _x_boundary_B(b, y_end)

    def unpack(z):
        ys = lo if pinned else z[0]
        yint = z[0:-1] if pinned else z[1:-1]
        return ys, yint, z[-1]

    def fun(z):
        ys, yint, ye = unpack(z)
        xs0, on_level, xe = ends(ys, ye)
        P = np.empty((n_nodes, 2))
        P[:, 0] = (1 - frac) * xs0 + frac * xe
        P[0, 1], P[1:-1, 1], P[-1, 1] = ys, yint, ye
        J, G = _jacobi(b, P)
        dxe = _slope(b, xe, ye)
        g_end = G[-1, 1] + np.sum(G[:, 0] * frac) * dxe
        grad = [] if pinned else [G[0, 1] + (np.sum(G[:, 0] * (1 - frac)) * _slope(b, xs0, ys) if on_level else 0.0)]
        return J, np.concatenate([grad, G[1:-1, 1], [g_end]])

    if init is None:
        y_mid = lo if pinned else _best_band_point(b, lo, hi)
        y0 = np.full(n_nodes, y_mid)
        if seed is not None:
            rng = np.random.default_rng(seed)
            k = np.arange(1, 4)
            amp = rng.normal(scale=0.15, size=3) / k
            y0 = y0 + np.sin(np.pi * np.outer(frac, k)) @ amp
            if not pinned:
                y0[0] = float(np.clip(y_mid + rng.uniform(-0.25, 0.25) * (hi - lo), lo, hi))
            y0[-1] += rng.normal(scale=0.15)
    else:
        y0 = np.asarray(init, dtype=float).copy()
    z0 = y0[1:] if pinned else y0
    bounds = ([] if pinned else [(lo, hi)]) + [(None, None)] * (len(z0) - (0 if pinned else 1))

    def projected(z, g):
        # components pushing against an active bound do not count
        pg = g.copy()
        if not pinned and (z[0] <= lo and g[0] > 0 or z[0] >= hi and g[0] < 0):
            pg[0] = 0.0
        return pg

    z, nit = z0, 0
    for _ in range(4):
        res = optimize.minimize(
            fun,
            z,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": max_iter - nit, "maxfun": 4 * max_iter, "ftol": 0.0, "gtol": gtol, "maxcor": 30},
        )
        z, nit = res.x, nit + int(res.nit)
        if np.max(np.abs(projected(z, fun(z)[1]))) < 1e-4 or nit >= max_iter:
            break
        # the free end node can run along B's boundary through the allowed
        # region, where the integrand vanishes; restart it on the extrapolated path
        z = z.copy()
        z[-1] = 2.0 * z[-2] - z[-3]
    z, nit = _newton_polish(fun, z, projected, lo, hi, pinned, gtol, nit)
    J, g = fun(z)
    gnorm = float(np.max(np.abs(projected(z, g))))
    if gnorm > gtol:
        if nit >= max_iter:
            raise MinimizationStalledError(f"Jacobi minimization stalled after {nit} iterations (|grad| = {gnorm:.2e})")
        raise MinimizationStalledError(f"Jacobi minimization stopped with |grad| = {gnorm:.2e}: {res.message}")
    res.x, res.nit = z, nit
    ys, yint, ye = unpack(res.x)
    xs0, on_level, xe = ends(ys, ye)
    P = np.empty((n_nodes, 2))
    P[:, 0] = (1 - frac) * xs0 + frac * xe
    P[0, 1], P[1:-1, 1], P[-1, 1] = ys, yint, ye
    end_dir = P[-1] - P[-2]
    end_angle = _angle(end_dir, (_slope(b, xe, ye), 1.0))
    if pinned:
        start_angle = math.nan
    else:
        tangent = (_slope(b, xs0, ys), 1.0) if on_level else (0.0, 1.0)
        start_angle = _angle(P[1] - P[0], tangent)
    return JacobiPath(P, J, int(res.nit), gnorm, start_angle, end_angle, on_level)


def _newton_polish(fun, z, projected, lo, hi, pinned, gtol, nit, max_steps=8):
    """Newton steps on the gradient with a finite-difference Hessian.

    Quasi-Newton line searches stall once the decrease of the action reaches
    round-off, well before the gradient does; Newton steps need no decrease
    test.  A step is kept only if it lowers the gradient norm.
    """
    J, g = fun(z)
    for _ in range(max_steps):
        pg = projected(z, g)
        if np.max(np.abs(pg)) < 0.1 * gtol:
            break
        free = np.ones(len(z), bool)
        if not pinned and pg[0] == 0.0 and g[0] != 0.0:
            free[0] = False
        idx = np.flatnonzero(free)
        h = 1e-6
        H = np.empty((len(idx), len(idx)))
        for c, i in enumerate(idx):
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            H[:, c] = (fun(zp)[1][idx] - fun(zm)[1][idx]) / (2 * h)
        H = 0.5 * (H + H.T)
        try:
            step = np.linalg.solve(H, -g[idx])
        except np.linalg.LinAlgError:
            break
        cand = z.copy()
        cand[idx] += step
        if not pinned:
            cand[0] = min(max(cand[0], lo), hi)
        Jc, gc = fun(cand)
        if not np.max(np.abs(projected(cand, gc))) < np.max(np.abs(pg)):
            break
        z, J, g = cand, Jc, gc
        nit += 1
    return z, nit


def _best_band_point(b: Barrier2D, lo: float, hi: float) -> float:
    """Point of the band with the thinnest barrier along ``x``, as a starting guess."""
    if hi <= lo:
        return lo
    ys = np.linspace(lo, hi, 41)
    xs = np.linspace(b.x0, b.x_max, 401)
    X, Y = np.meshgrid(xs, ys)
    d = np.sqrt(np.maximum(b.V(X, Y) - b.E0, 0.0))
    return float(ys[np.argmin(np.sum(d, axis=1))])


def normal_action(b: Barrier2D, n_nodes: int = 64, seed: int | None = None) -> float:
    """Normal tunneling exponent ``A0(A -> B)`` from the minimal Jacobi path."""
    return minimal_path(b, n_nodes=n_nodes, seed=seed).action


# --------------------------------------------------------------------------
# enhanced channel
# --------------------------------------------------------------------------


def sigma_phase(b: Barrier2D, roots: tuple[float, float] | None = None) -> float:
    """``X = (1/hbar) int_{y0}^{y1} sqrt(2 m [Vy + Vint(x0, y) - eps]) dy`` with ``sigma = -i X``.

    Parameters
    ----------
    roots : (y0, y1), optional
        Explicit turning points; found by :func:`wall_roots` when omitted.

    Raises
    ------
    NoRootsError
        No forbidden interval below region A.
    RootOrderError
        ``y0 > y1``, or the interval between them is classically allowed.
    """
    y0, y1 = wall_roots(b)[:2] if roots is None else (float(roots[0]), float(roots[1]))
    if y0 > y1:
        raise RootOrderError(f"y0 = {y0} lies above y1 = {y1}")
    if y0 == y1:
        return 0.0
    if float(b.wall_potential(0.5 * (y0 + y1))) < b.eps:
        raise RootOrderError(f"the interval [{y0}, {y1}] is classically allowed")
    mid, half = 0.5 * (y0 + y1), 0.5 * (y1 - y0)

    def integrand(theta):
        # y = mid - half cos(theta) removes both square-root zeros
        y = mid - half * math.cos(theta)
        return math.sqrt(2.0 * b.m * max(float(b.wall_potential(y)) - b.eps, 0.0)) * half * math.sin(theta)

    val, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val / b.hbar


@dataclass(frozen=True)
class EnhancedResult:
    """Normal and enhanced exponents of one barrier.

    Attributes
    ----------
    A0 : float
        Normal exponent ``A0(A -> B)``.
    sigma_mag : float
        ``X >= 0`` with ``sigma = -i X``.
    A1 : float
        Enhanced exponent ``A0(f -> B) - 2 X``.
    W : float
        ``max(exp(-A0), exp(-A1))`` clamped to 1.
    f_point : tuple
        ``(x0, y0)``.
    A0_fB : float
        Exponent of the leg from ``f`` to B.
    valid : bool
        False once ``exp(-A1) > 0.1``, where the estimate is only indicative.
    """

    A0: float
    sigma_mag: float
    A1: float
    W: float
    f_point: tuple
    A0_fB: float
    valid: bool


def enhanced_action(b: Barrier2D, n_nodes: int = 64, seed: int | None = None) -> EnhancedResult:
    """Exponents of the normal and the enhanced channel.

    ``seed`` perturbs the initial paths of both minimizations.
    """
    y0, y1, _ = wall_roots(b)
    X = sigma_phase(b, (y0, y1))
    A0 = normal_action(b, n_nodes, seed=seed)
    A0_fB = minimal_path(b, start=(b.x0, y0), n_nodes=n_nodes, seed=seed).action
    A1 = A0_fB - 2.0 * X
    W = min(1.0, math.exp(-min(A0, A1)))
    return EnhancedResult(A0, X, A1, W, (b.x0, y0), A0_fB, bool(math.exp(-A1) <= 0.1))


@dataclass(frozen=True)
class ResonanceResult:
    """Parameter value where ``A1 = 0``; always outside the range of validity."""

    param: str
    value: float
    A1: float
    result: EnhancedResult
    evaluations: int
    outside_validity: bool = True


def resonance_search(
    b: Barrier2D,
    param: str,
    bracket: tuple[float, float],
    atol: float = 1e-6,
    max_iter: int = 200,
    n_nodes: int = 64,
    seed: int | None = None,
) -> ResonanceResult:
    """Bisection on ``A1(param)`` for ``param`` in ``{"lam", "eps"}``.

    Raises
    ------
    NoSignChangeError
        If ``A1`` has the same sign at both ends of ``bracket``.
    """
    if param not in ("lam", "eps"):
        raise ValueError(f"param must be 'lam' or 'eps', got {param!r}")
    lo, hi = map(float, bracket)

    def A1(v):
        return enhanced_action(b.with_params(**{param: v}), n_nodes, seed)

    r_lo, r_hi = A1(lo), A1(hi)
    n = 2
    if r_lo.A1 == 0.0:
        return ResonanceResult(param, lo, 0.0, r_lo, n)
    if r_hi.A1 == 0.0:
        return ResonanceResult(param, hi, 0.0, r_hi, n)
    if r_lo.A1 * r_hi.A1 > 0:
        raise NoSignChangeError(f"A1 = {r_lo.A1:.6g} at {param} = {lo} and {r_hi.A1:.6g} at {param} = {hi}")
    f_lo = r_lo.A1
    best = min((r_lo, lo), (r_hi, hi), key=lambda p: abs(p[0].A1))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = A1(mid)
        n += 1
        if abs(r.A1) < abs(best[0].A1):
            best = (r, mid)
        if abs(r.A1) < atol or mid in (lo, hi):
            break
        if (r.A1 < 0) == (f_lo < 0):
            lo, f_lo = mid, r.A1
        else:
            hi = mid
    r, v = best
    return ResonanceResult(param, v, r.A1, r, n)
