"""
Exact two-band Zener wave function as a contour integral over momentum.

In dimensionless units the solution reads

    psi(x, t) = int dq/(2 pi) exp{ i (g/2) [q x - F_t(q)] },
    F_t(q)    = int_{-Lambda}^{q} f_t(u, q) du,
    f_t(u, q) = sqrt(1 + p(u, q)**2),  p = u + H(u - q + t) - H(t),

with ``H`` the primitive of the drive.  The square root is continued along the
``u`` path starting from the negative real value at ``u = -Lambda``.

Geometry of the ``u`` path
--------------------------
The radicand vanishes at the branch points ``u_plus`` (``p = i``) and
``u_minus`` (``p = -i``); without a drive they sit at ``+-i``.  Every path is
built the same way:

    -Lambda  ->  u_plus - rho  ->  arc of radius rho around u_plus  ->  q

The arc starts at angle ``pi`` and ends at a continuous angle ``phi``; the
final leg is radial.  ``phi`` labels the sheet: the principal sheet (the
one reached from real ``q`` along the real axis) has ``phi`` in
``(pi/2, 5pi/2)``, and the sheet reached by carrying ``q`` over the branch
point ``q = i`` has ``phi`` in ``(-3pi/2, pi/2)``.  Along a ``q`` contour
``phi`` is tracked continuously, which is analytic continuation in ``q``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import optimize

from .errors import BranchTrackingError, SaddleNotFoundError
from .fields import Drive, NO_DRIVE, Shape, antiderivative, h_complex
from .system import ZenerSystem

__all__ = [
    "ContourSpec",
    "WaveSample",
    "FValues",
    "PacketProbability",
    "integrand_f",
    "big_F",
    "F_derivatives",
    "monodromy",
    "find_saddles",
    "default_contour",
    "wavefunction",
    "incident_level",
    "packet_probability",
    "incident_phase",
    "PRINCIPAL",
    "OUTGOING",
]

PRINCIPAL = 1
OUTGOING = 2

_XG, _WG = leggauss(16)
_HMAX = 2.0
_LINK_DEPTH = 0.8


@dataclass(frozen=True)
class ContourSpec:
    """Polyline in the ``q`` plane.

    ``sheet`` applies at ``nodes[anchor]``; the rest of the polyline is reached
    by continuation.  The polyline must keep a distance of at least ``1e-3``
    from the branch points ``q = +-i``.
    """

    nodes: tuple
    cutoff: float = 50.0
    sheet: int = PRINCIPAL
    anchor: int = 0

    def __post_init__(self):
        nodes = tuple(complex(z) for z in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 2:
            raise ValueError("a contour needs at least two nodes")
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")
        if self.sheet not in (PRINCIPAL, OUTGOING):
            raise ValueError(f"unknown sheet {self.sheet}")
        if not 0 <= self.anchor < len(nodes):
            raise ValueError("anchor out of range")
        for a, b in zip(nodes[:-1], nodes[1:]):
            for bp in (1j, -1j):
                if _segment_distance(bp, a, b) < 1e-3:
                    raise ValueError(f"contour leg {a} -> {b} passes within 1e-3 of the branch point {bp}")


def _segment_distance(z, a, b) -> float:
    d = b - a
    if d == 0:
        return abs(z - a)
    s = min(max(((z - a) * d.conjugate()).real / abs(d) ** 2, 0.0), 1.0)
    return abs(z - (a + s * d))


@dataclass(frozen=True)
class WaveSample:
    """``psi(x, t)`` in the gauge fixed by the cutoff.

    ``flux_weight`` is ``|F''|`` at the contributing saddle(s), the local
    group velocity; ``|value|**2 * flux_weight`` is the quantity compared
    between incident and outgoing waves.
    """

    x: float
    t: float
    value: complex
    saddles: tuple = ()
    flux_weight: float = float("nan")
    admissibility: float = float("inf")


class FValues(NamedTuple):
    F: complex
    dF: complex
    d2F: complex
    f_end: complex


# --------------------------------------------------------------------------
# drive helpers
# --------------------------------------------------------------------------


def _h_prime(drive: Drive, s):
    s = np.asarray(s)
    if drive.is_null:
        return np.zeros_like(s, dtype=complex)
    r, w = drive.amplitude_ratio, drive.width
    if drive.shape is Shape.LORENTZIAN_CUBED:
        z = s / w
        return -6.0 * r * z / w / (1.0 + z * z) ** 4
    if drive.shape is Shape.COSINE:
        return -r * w * np.sin(w * s)
    return -2.0 * w * w * s * r * np.exp(-(w * s) ** 2)


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def _sheet_angle(q: complex, u_plus: complex, sheet: int) -> float:
    a = math.atan2((q - u_plus).imag, (q - u_plus).real)
    if sheet == PRINCIPAL:
        return a if a > 0.5 * math.pi else a + 2.0 * math.pi
    return a if a < 0.5 * math.pi else a - 2.0 * math.pi


class _Kernel:
    """Evaluates ``F`` and its ``q`` derivatives at fixed ``t``."""

    def __init__(self, t: float, drive: Drive, cutoff: float):
        self.t = float(t)
        self.drive = drive
        self.cutoff = float(cutoff)
        self.null = drive.is_null
        self.Ht = complex(antiderivative(drive, self.t)) if not self.null else 0.0
        self.ht = complex(h_complex(drive, self.t)) if not self.null else 0.0

    # -- drive primitive continued along a path ---------------------------
    def H_path(self, v):
        """Primitive along an ordered array of points, continued without jumps."""
        d = self.drive
        if self.null:
            return np.zeros_like(v)
        if d.shape is not Shape.LORENTZIAN_CUBED:
            return antiderivative(d, v)
        r, w = d.amplitude_ratio, d.width
        z = v / w
        q = 1.0 + z * z
        lg = np.log((1.0 + 1j * z) / (1.0 - 1j * z))
        lg = lg.real + 1j * np.unwrap(lg.imag)
        return r * w * (z / (4.0 * q * q) + 3.0 * z / (8.0 * q) + 0.375 * lg / 2j)

    def p_scalar(self, u, q):
        if self.null:
            return u
        return u + complex(antiderivative(self.drive, u - q + self.t)) - self.Ht

    def dp_scalar(self, u, q):
        if self.null:
            return 1.0
        return 1.0 + complex(h_complex(self.drive, u - q + self.t))

    def poles(self, q):
        if self.null or self.drive.shape is not Shape.LORENTZIAN_CUBED:
            return []
        w = self.drive.width
        return [q - self.t + 1j * w, q - self.t - 1j * w]

    # -- branch points ------------------------------------------------------
    def branch_point(self, q: complex, target: complex, guess: complex | None = None) -> complex:
        """Root of ``p(u, q) = target`` (``target = +-i``)."""
        if self.null:
            return target
        if guess is not None:
            u = self._newton_p(q, target, guess, 1.0)
            if u is not None:
                return u
        # homotopy in the drive amplitude from the static root
        u = target
        for s in np.linspace(0.125, 1.0, 8):
            u = self._newton_p(q, target, u, s)
            if u is None:
                raise BranchTrackingError(f"branch point p = {target} not found for q = {q}")
        return u

    def _newton_p(self, q, target, u, s):
        for _ in range(60):
            val = u + s * (complex(antiderivative(self.drive, u - q + self.t)) - self.Ht) - target
            der = 1.0 + s * complex(h_complex(self.drive, u - q + self.t))
            if der == 0:
                return None
            du = val / der
            u = u - du
            if abs(du) < 1e-14 * max(1.0, abs(u)):
                return u
        return None

    # -- path construction --------------------------------------------------
    def singular_points(self, q, u_plus):
        pts = [u_plus, self.branch_point(q, -1j)]
        pts += self.poles(q)
        return np.array(pts, dtype=complex)

    def loop_radius(self, q, u_plus, sing):
        others = sing[1:]
        dist = np.min(np.abs(others - u_plus)) if others.size else math.inf
        return min(0.25, 0.4 * dist)

    @staticmethod
    def _line(a, b, sing, hmax=_HMAX):
        L = abs(b - a)
        if L == 0:
            return np.empty(0, complex), np.empty(0, complex)
        d = (b - a) / L
        edges = [0.0]
        s = 0.0
        floor = 1e-12 * max(1.0, L)
        while s < L:
            u = a + d * s
            dist = np.min(np.abs(sing - u)) if sing.size else math.inf
            step = max(min(hmax, 0.5 * dist, L - s), floor)
            s = min(s + step, L)
            edges.append(s)
        e = np.asarray(edges)
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * (e[1:] - e[:-1])
        sg = (mid[:, None] + half[:, None] * _XG[None, :]).ravel()
        wg = (half[:, None] * _WG[None, :]).ravel()
        return a + d * sg, d * wg

    @staticmethod
    def _arc(c, rho, phi0, phi1):
        sweep = phi1 - phi0
        if sweep == 0:
            return np.empty(0, complex), np.empty(0, complex)
        n = max(1, int(math.ceil(abs(sweep) / 0.5)))
        e = np.linspace(phi0, phi1, n + 1)
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * (e[1:] - e[:-1])
        ph = (mid[:, None] + half[:, None] * _XG[None, :]).ravel()
        wp = (half[:, None] * _WG[None, :]).ravel()
        z = rho * np.exp(1j * ph)
        return c + z, 1j * z * wp

    def path(self, q, phi, u_plus, rho=None, waypoints: Sequence[complex] = ()):
        sing = self.singular_points(q, u_plus)
        if rho is None:
            rho = self.loop_radius(q, u_plus, sing)
        start = -self.cutoff + 0j
        pts = [start, *waypoints, u_plus - rho]
        pieces = [self._line(a, b, sing) for a, b in zip(pts[:-1], pts[1:])]
        pieces.append(self._arc(u_plus, rho, math.pi, phi))
        pieces.append(self._line(u_plus + rho * complex(math.cos(phi), math.sin(phi)), q, sing))
        u = np.concatenate([pc[0] for pc in pieces])
        w = np.concatenate([pc[1] for pc in pieces])
        return u, w

    # -- the integrand ------------------------------------------------------
    def tracked_f(self, u, q):
        """``p`` and the continuously tracked root ``f`` along ordered nodes ``u``."""
        v = u - q + self.t
        p = u + self.H_path(v) - self.Ht
        rad = 1.0 + p * p
        jump = np.abs(np.angle(rad[1:] / rad[:-1]))
        if jump.size and np.max(jump) > 0.5 * math.pi:
            k = int(np.argmax(jump))
            raise BranchTrackingError(f"radicand phase jumps by {jump[k]:.3f} rad between u = {u[k]} and {u[k + 1]}")
        s = np.sqrt(rad)
        flips = np.real(s[1:] * np.conj(s[:-1])) < 0.0
        sign = np.concatenate(([1.0], np.cumprod(np.where(flips, -1.0, 1.0))))
        f = s * sign
        if f[0].real > 0:
            f = -f
        return p, f, v

    def evaluate(self, q, phi, u_plus, rho=None, waypoints=()) -> FValues:
        u, w = self.path(q, phi, u_plus, rho, waypoints)
        p, f, v = self.tracked_f(u, q)
        fq = complex(np.sqrt(1.0 + q * q))
        if (fq * f[-1].conjugate()).real < 0:
            fq = -fq
        F = complex(np.sum(w * f))
        if self.null:
            return FValues(F, fq, q / fq, fq)
        hv = h_complex(self.drive, v)
        hpv = _h_prime(self.drive, v)
        dF = fq - complex(np.sum(w * p * hv / f))
        d2F = q * (1.0 - self.ht) / fq + complex(np.sum(w * ((hv * hv + p * hpv) / f - p * p * hv * hv / f**3)))
        return FValues(F, dF, d2F, fq)


# --------------------------------------------------------------------------
# public evaluation of the integrand and of F
# --------------------------------------------------------------------------


def integrand_f(u: complex, q: complex, t: float = 0.0, drive: Drive = NO_DRIVE, via: Sequence[complex] = (), cutoff: float = 50.0) -> complex:
    """``f_t(u, q)`` continued from ``u = -cutoff`` along ``-cutoff -> *via -> u``.

    The branch is negative real at the start of the path, so on the real axis
    ``f = -sqrt(1 + p**2)`` unless the path wound around a branch point.
    """
    k = _Kernel(t, drive, cutoff)
    pts = [-float(cutoff) + 0j, *[complex(z) for z in via], complex(u)]
    sing = np.array([k.branch_point(q, 1j), k.branch_point(q, -1j), *k.poles(q)])
    nodes = np.concatenate([k._line(a, b, sing, hmax=0.25)[0] for a, b in zip(pts[:-1], pts[1:])])
    nodes = np.append(nodes, complex(u))
    _, f, _ = k.tracked_f(nodes, q)
    return complex(f[-1])


def F_derivatives(
    q: complex,
    t: float = 0.0,
    drive: Drive = NO_DRIVE,
    sheet: int = PRINCIPAL,
    cutoff: float = 50.0,
    loop_radius: float | None = None,
    waypoints: Sequence[complex] = (),
) -> FValues:
    """``F``, ``F'``, ``F''`` and the end value ``f(q, q)`` at one point of a sheet."""
    k = _Kernel(t, drive, cutoff)
    q = complex(q)
    up = k.branch_point(q, 1j)
    return k.evaluate(q, _sheet_angle(q, up, sheet), up, loop_radius, waypoints)


def big_F(q: complex, t: float = 0.0, drive: Drive = NO_DRIVE, contour: ContourSpec | None = None, sheet: int | None = None, **kw) -> complex:
    """``F_t(q) = int f_t(u, q) du`` from ``-cutoff`` to ``q``.

    ``contour`` supplies the cutoff and the sheet; ``sheet`` overrides it.
    Values depend on the cutoff only through a ``q``-independent constant.
    """
    cutoff = contour.cutoff if contour is not None else kw.pop("cutoff", 50.0)
    if sheet is None:
        sheet = contour.sheet if contour is not None else PRINCIPAL
    return F_derivatives(q, t, drive, sheet, cutoff, **kw).F


def monodromy(center: complex, radius: float, t: float = 0.0, drive: Drive = NO_DRIVE, n: int = 256, cutoff: float = 50.0) -> int:
    """Carry ``q`` once around a circle and report the factor picked up by ``f(q, q)``.

    The starting value comes from the principal-sheet path; it is then
    continued step by step around the circle.  Since ``p(q, q) = q`` for any
    drive, the end value is a root of ``1 + q**2`` and the continuation picks
    the root nearest the previous one.  Returns ``-1`` when the sheet flips and
    ``+1`` when it does not.

    Raises
    ------
    BranchTrackingError
        When ``n`` is too small to follow the root (a step turns the radicand
        by more than ``pi/2``).
    """
    k = _Kernel(t, drive, cutoff)
    # the quarter-step offset keeps the first point off the real and imaginary axes
    qs = center + radius * np.exp(2j * np.pi * (np.arange(n + 1) + 0.25) / n)
    up = k.branch_point(qs[0], 1j)
    first = k.evaluate(qs[0], _sheet_angle(qs[0], up, PRINCIPAL), up).f_end
    val = first
    for a, b in zip(qs[:-1], qs[1:]):
        turn = abs(np.angle((1.0 + b * b) / (1.0 + a * a)))
        if turn > 0.5 * math.pi:
            raise BranchTrackingError(f"step {a} -> {b} turns the radicand by {turn:.3f} rad; increase n")
        root = complex(np.sqrt(1.0 + b * b))
        val = root if (root * val.conjugate()).real >= 0 else -root
    return 1 if abs(val - first) < abs(val + first) else -1


# --------------------------------------------------------------------------
# saddles and contours
# --------------------------------------------------------------------------


@dataclass
class _Point:
    q: complex
    phi: float
    u_plus: complex
    vals: FValues = None


def _step_to(k: _Kernel, pt: _Point, q_new: complex) -> _Point:
    up = k.branch_point(q_new, 1j, guess=pt.u_plus)
    a_old = math.atan2((pt.q - pt.u_plus).imag, (pt.q - pt.u_plus).real)
    a_new = math.atan2((q_new - up).imag, (q_new - up).real)
    return _Point(q_new, pt.phi + _wrap(a_new - a_old), up)


def _newton_saddle(k: _Kernel, x: float, seed: complex, sheet: int, max_iter: int = 50, tol: float = 1e-11) -> _Point:
    up = k.branch_point(seed, 1j)
    pt = _Point(complex(seed), _sheet_angle(seed, up, sheet), up)
    pt.vals = k.evaluate(pt.q, pt.phi, pt.u_plus)
    for _ in range(max_iter):
        res = pt.vals.dF - x
        if abs(res) < tol * max(1.0, abs(x)):
            return pt
        if pt.vals.d2F == 0:
            raise SaddleNotFoundError(f"F'' vanishes at q = {pt.q}; Newton cannot proceed")
        step = res / pt.vals.d2F
        # keep the step small next to the branch point so the sheet angle is tracked
        cap = 0.5 * abs(pt.q - pt.u_plus)
        if abs(step) > cap:
            step *= cap / abs(step)
        lam = 1.0
        while lam > 1e-6:
            cand = _step_to(k, pt, pt.q - lam * step)
            try:
                cand.vals = k.evaluate(cand.q, cand.phi, cand.u_plus)
            except BranchTrackingError:
                cand.vals = None
            if cand.vals is not None and abs(cand.vals.dF - x) < abs(res):
                pt = cand
                break
            lam *= 0.5
        else:
            break
    raise SaddleNotFoundError(f"Newton on F'(q) = {x} from q = {seed} did not converge")


def find_saddles(x: float, t: float = 0.0, drive: Drive = NO_DRIVE, cutoff: float = 50.0) -> list[tuple[complex, int]]:
    """Saddles of ``q x - F_t(q)`` relevant at ``(x, t)`` as ``(q, sheet)`` pairs.

    Seeds: ``q = +-sqrt(x**2 - 1)`` on the principal sheet for ``x < -1``, and
    ``q = t`` (plus ``sqrt(x**2 - 1)`` when ``x > 1``) on the outgoing sheet
    otherwise.  At ``x = -1`` exactly the two principal saddles merge at 0.
    """
    k = _Kernel(t, drive, cutoff)
    return [(pt.q, sheet) for pt, sheet in _saddle_points(k, x)]


def _saddle_points(k: _Kernel, x: float):
    if x == -1.0 and k.null:
        up = 1j
        pt = _Point(0j, _sheet_angle(0j, up, PRINCIPAL), up)
        pt.vals = k.evaluate(0j, pt.phi, up)
        return [(pt, PRINCIPAL)]
    if x < -1.0:
        Q = math.sqrt(x * x - 1.0)
        out = []
        for seed in (-Q, Q):
            out.append((_newton_saddle(k, x, complex(seed), PRINCIPAL), PRINCIPAL))
        if abs(out[0][0].q - out[1][0].q) < 1e-8:
            raise SaddleNotFoundError("both seeds converged to the same saddle")
        return out
    seeds = [complex(k.t)]
    if x > 1.0:
        seeds.append(complex(math.sqrt(x * x - 1.0)))
    last = None
    for seed in seeds:
        try:
            return [(_newton_saddle(k, x, seed, OUTGOING), OUTGOING)]
        except (SaddleNotFoundError, BranchTrackingError) as exc:
            last = exc
    raise SaddleNotFoundError(f"no outgoing saddle at x = {x}, t = {k.t}: {last}")


def _descent(g: float, d2F: complex, tail: float):
    """Unit steepest-descent direction (pointing to increasing Re q) and half-length."""
    phi2 = -0.5j * g * d2F
    alpha = 0.5 * (math.pi - math.atan2(phi2.imag, phi2.real))
    d = complex(math.cos(alpha), math.sin(alpha))
    if d.real < 0 or (d.real == 0 and d.imag < 0):
        d = -d
    return d, tail / math.sqrt(g * abs(d2F))


def default_contour(sys: ZenerSystem, x: float, t: float = 0.0, drive: Drive = NO_DRIVE, cutoff: float = 50.0, tail: float = 6.0) -> ContourSpec:
    """Saddle-aware contour: steepest-descent segments joined by straight links.

    For ``x < -1`` one connected polyline runs through both principal saddles;
    at the merged point ``x = -1`` (no drive) the Airy rays at angles
    ``5 pi/6`` and ``pi/6`` are used; elsewhere a single segment crosses the
    outgoing saddle.
    """
    k = _Kernel(t, drive, cutoff)
    pts = _saddle_points(k, x)
    g = sys.g
    if len(pts) == 2:
        nodes = []
        for j, (pt, _) in enumerate(pts):
            d, L = _descent(g, pt.vals.d2F, tail)
            # the inner halves dip towards q = -i; shortening them keeps the
            # link between the saddles on the real-axis side of the branch point
            L_in = min(L, _LINK_DEPTH / abs(d.imag)) if d.imag != 0 else L
            lo, hi = (L, L_in) if j == 0 else (L_in, L)
            nodes += [pt.q - lo * d, pt.q, pt.q + hi * d]
        return ContourSpec(tuple(nodes), cutoff, PRINCIPAL, anchor=1)
    pt, sheet = pts[0]
    if abs(pt.vals.d2F) < 1e-10:
        # cubic saddle: q x - F ~ q**3 / 6 near q = 0
        s = (6.0 * tail * tail / g) ** (1.0 / 3.0)
        nodes = (s * np.exp(5j * np.pi / 6), 0j, s * np.exp(1j * np.pi / 6))
        return ContourSpec(nodes, cutoff, sheet, anchor=1)
    d, L = _descent(g, pt.vals.d2F, tail)
    nodes = (pt.q - L * d, pt.q, pt.q + L * d)
    for a, b in zip(nodes[:-1], nodes[1:]):
        if min(_segment_distance(1j, a, b), _segment_distance(-1j, a, b)) < 0.05:
            raise BranchTrackingError(f"steepest-descent segment at q = {pt.q} runs into a branch point")
    return ContourSpec(nodes, cutoff, sheet, anchor=1)


# --------------------------------------------------------------------------
# quadrature along a q contour
# --------------------------------------------------------------------------


def _leg_nodes(a, b, n):
    xg, wg = leggauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * xg, 0.5 * (b - a) * wg


def _track_values(k: _Kernel, start: _Point, qs: np.ndarray) -> list[FValues]:
    out = []
    pt = start
    for q in qs:
        pt = _step_to(k, pt, complex(q))
        out.append(k.evaluate(pt.q, pt.phi, pt.u_plus))
    return out


def _contour_integral(k: _Kernel, g: float, x: float, spec: ContourSpec, n_legs: Sequence[int]):
    """Sum of GL rules on every leg; continuation anchored at ``spec.anchor``."""
    nodes = spec.nodes
    a = spec.anchor
    up = k.branch_point(nodes[a], 1j)
    anchor_pt = _Point(nodes[a], _sheet_angle(nodes[a], up, spec.sheet), up)
    qs, ws = [], []
    for (lo, hi), n in zip(zip(nodes[:-1], nodes[1:]), n_legs):
        q, w = _leg_nodes(lo, hi, n)
        qs.append(q)
        ws.append(w)
    q_all = np.concatenate(qs)
    w_all = np.concatenate(ws)
    # index of the anchor vertex in the node sequence
    split = sum(n_legs[:a])
    fwd = _track_values(k, anchor_pt, q_all[split:])
    bwd = _track_values(k, anchor_pt, q_all[:split][::-1])[::-1]
    vals = bwd + fwd
    F = np.array([v.F for v in vals])
    phase = 0.5j * g * (q_all * x - F)
    return complex(np.sum(w_all * np.exp(phase))) / (2.0 * math.pi)


def wavefunction(
    sys: ZenerSystem,
    x: float,
    t: float = 0.0,
    drive: Drive = NO_DRIVE,
    contour: ContourSpec | None = None,
    cutoff: float = 50.0,
    tail: float = 6.0,
    n_saddle: int = 48,
    rtol: float = 1e-9,
) -> WaveSample:
    """``psi(x, t)`` by quadrature along a deformed ``q`` contour.

    Parameters
    ----------
    contour : ContourSpec, optional
        Explicit polyline.  When omitted the saddle-aware contour of
        :func:`default_contour` is used, with ``n_saddle`` Gauss-Legendre
        nodes on each half of a steepest-descent segment.
    rtol : float
        Links between saddles (and every leg of an explicit contour) are
        refined by doubling until the leg integral changes by less than
        ``rtol`` relative to the running total.

    Raises
    ------
    SaddleNotFoundError
        When the automatic contour cannot locate a saddle.
    """
    if abs(x) > 20 or abs(t) > 20:
        raise ValueError("wavefunction is supported for |x|, |t| <= 20")
    g = sys.g
    k = _Kernel(t, drive, contour.cutoff if contour is not None else cutoff)
    saddles = ()
    flux = float("nan")
    adm = float("inf")
    if contour is None:
        pts = _saddle_points(k, x)
        contour = default_contour(sys, x, t, drive, cutoff, tail)
        saddles = tuple(pt.q for pt, _ in pts)
        flux = float(np.mean([abs(pt.vals.d2F) for pt, _ in pts]))
        adm = min(_admissibility(k, g, pt) for pt, _ in pts)
        fixed = set(range(0, 2)) | ({3, 4} if len(pts) == 2 else set())
    else:
        fixed = set()
    n_legs_total = len(contour.nodes) - 1
    n = [n_saddle if i in fixed else 32 for i in range(n_legs_total)]
    value = _contour_integral(k, g, x, contour, n)
    for _ in range(6):
        refine = [i for i in range(n_legs_total) if i not in fixed]
        if not refine:
            break
        n2 = [2 * m if i in refine else m for i, m in enumerate(n)]
        v2 = _contour_integral(k, g, x, contour, n2)
        done = abs(v2 - value) <= rtol * abs(v2)
        value, n = v2, n2
        if done:
            break
    return WaveSample(float(x), float(t), value, saddles, flux, adm)


def _admissibility(k: _Kernel, g: float, pt: _Point, h: float = 1e-3) -> float:
    """``g |F''|**3 / |F'''|**2``: how many saddle widths fit before the cubic term matters."""
    if pt.vals is None or abs(pt.vals.d2F) == 0:
        return 0.0
    vals = []
    for dq in (h, -h):
        c = _step_to(k, pt, pt.q + dq)
        vals.append(k.evaluate(c.q, c.phi, c.u_plus).d2F)
    d3 = (vals[0] - vals[1]) / (2 * h)
    if d3 == 0:
        return math.inf
    return g * abs(pt.vals.d2F) ** 3 / abs(d3) ** 2


# --------------------------------------------------------------------------
# transition probability
# --------------------------------------------------------------------------


def incident_phase(x):
    """Exact stationary-phase argument ``S(x) = |x| sqrt(x**2 - 1) - arccosh|x|`` for ``x < -1``.

    The incident standing wave is ``cos((g/4) S(x) - pi/4)``; ``S(x) -> x**2``
    only for ``|x| >> 1``.
    """
    ax = np.abs(np.asarray(x, dtype=float))
    return ax * np.sqrt(ax * ax - 1.0) - np.arccosh(ax)


def gauge_phase(sys: ZenerSystem, cutoff: float = 50.0) -> float:
    """Constant phase of ``psi`` set by the cutoff (static principal sheet)."""
    L = float(cutoff)
    G = 0.5 * (-L * math.sqrt(1.0 + L * L) - math.asinh(L))
    return -0.5 * sys.g * G


def _saddle_intensity(k: _Kernel, g: float, x: float, pt: _Point, tail: float, n: int) -> float:
    """Flux-weighted ``|psi_j|**2 |F''|`` of one saddle, integrated over its own descent segment."""
    d, L = _descent(g, pt.vals.d2F, tail)
    lo, hi = pt.q - L * d, pt.q + L * d
    total = 0j
    for a, b in ((pt.q, lo), (pt.q, hi)):
        qs, ws = _leg_nodes(a, b, n)
        vals = _track_values(k, pt, qs)
        F = np.array([v.F for v in vals])
        sgn = 1.0 if b == hi else -1.0
        total += sgn * complex(np.sum(ws * np.exp(0.5j * g * (qs * x - F))))
    return abs(total / (2.0 * math.pi)) ** 2 * abs(pt.vals.d2F)


def incident_level(
    sys: ZenerSystem,
    drive: Drive = NO_DRIVE,
    t: float | None = None,
    x0: float = -3.0,
    cutoff: float = 50.0,
    tail: float = 8.0,
    n: int = 64,
) -> float:
    """Squared amplitude of one travelling component of the incident standing wave.

    For ``x < -1`` the two real saddles carry the incoming and the reflected
    wave.  Each is integrated over its own steepest-descent segment (the
    valley between them is exponentially small), flux weighted with
    ``|F''|``, and the two results are averaged.
    """
    if not x0 < -1.0:
        raise ValueError(f"x0 must lie in the incident region x < -1, got {x0}")
    if t is None:
        t = _incident_time(drive)
    k = _Kernel(t, drive, cutoff)
    pts = _saddle_points(k, x0)
    return float(np.mean([_saddle_intensity(k, sys.g, x0, pt, tail, n) for pt, _ in pts]))


def _incident_time(drive: Drive) -> float:
    if drive.is_null:
        return 0.0
    return -(3.0 * _pulse_scale(drive) + 5.0)


def _pulse_scale(drive: Drive) -> float:
    if drive.is_null:
        return 0.0
    if drive.shape is Shape.LORENTZIAN_CUBED:
        return drive.width
    return 1.0 / drive.width


class PacketProbability(NamedTuple):
    W: float
    exponent: float
    t_peak: float
    incident: float
    peak: float
    n_used: int
    n_rejected: int


def packet_probability(
    sys: ZenerSystem,
    drive: Drive | None = None,
    n_scan: int = 400,
    cutoff: float = 50.0,
    min_admissibility: float = 25.0,
    x_exit: float | None = None,
) -> PacketProbability:
    """Peak outgoing intensity over the incident one.

    The outgoing packet is followed along ``x_cl(t) = x_exit + sqrt(1 + t**2) - 1``
    for ``t`` in ``[0, 3 theta + 5]`` (``[0, 5]`` without a drive).  Both
    intensities are flux weighted, ``|psi|**2 |F''|``, which cancels the
    velocity factor of the saddle-point prefactor.  Samples whose saddle is not
    isolated (``g |F''|**3 / |F'''|**2 < min_admissibility``, the region next
    to the exit point where the outgoing saddle meets the branch point) or
    whose contour cannot be tracked are skipped.  The coarse maximum is
    refined by bounded Brent search between its neighbours.
    """
    from .semiclassical import exit_point

    drive = NO_DRIVE if drive is None else drive
    if x_exit is None:
        x_exit = exit_point(drive)
    inc = incident_level(sys, drive, cutoff=cutoff)
    t_end = 3.0 * _pulse_scale(drive) + 5.0
    ts = np.linspace(0.0, t_end, n_scan)

    def level(t):
        x = x_exit + math.sqrt(1.0 + t * t) - 1.0
        s = wavefunction(sys, x, t, drive, cutoff=cutoff)
        if s.admissibility < min_admissibility:
            return None
        return abs(s.value) ** 2 * s.flux_weight

    levels = np.full(n_scan, np.nan)
    rejected = 0
    for i, t in enumerate(ts):
        try:
            v = level(float(t))
        except (BranchTrackingError, SaddleNotFoundError):
            v = None
        if v is None:
            rejected += 1
        else:
            levels[i] = v
    if np.all(np.isnan(levels)):
        raise SaddleNotFoundError("no admissible sample on the outgoing path")
    i = int(np.nanargmax(levels))
    best_t, best = float(ts[i]), float(levels[i])
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n_scan - 1)]
    if hi > lo:

        def neg(t):
            try:
                v = level(float(t))
            except (BranchTrackingError, SaddleNotFoundError):
                v = None
            return -v if v is not None else 0.0

        res = optimize.minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    W = min(best / inc, 1.0)
    return PacketProbability(W, -math.log(W), best_t, inc, best, n_scan - rejected, rejected)
