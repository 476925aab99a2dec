"""End-to-end acceptance checks, one group per criterion.

Each test records a PASS/FAIL line through the ``verdict`` fixture; the lines
are repeated in the terminal summary.  Literal statements that the numerics
show to be unattainable are kept as strict xfails and still print FAIL.
"""

import math
import time

import numpy as np
import pytest
from scipy import optimize

from tunnel_lab.enhanced_2d import enhanced_action, minimal_path, normal_action, reference_barrier, resonance_search
from tunnel_lab.exact_zener import PRINCIPAL, ContourSpec, default_contour, gauge_phase, incident_phase, packet_probability, wavefunction
from tunnel_lab.fields import NO_DRIVE, Drive, Shape, drive_integral, h_real
from tunnel_lab.semiclassical import (
    Potential1D,
    action_integral,
    check_semiclassical,
    closed_form_action,
    exit_point,
    gaussian_bump,
    instanton_bvp,
    parabolic_barrier,
    square_barrier,
    tunneling_time,
    wkb_action,
)
from tunnel_lab.system import ZenerSystem

# tests/oracles/enhanced_reference_oracle.py, lam = 3, eps = 0.5
ORACLE_A1 = 5.65816404590258

PULSE = Drive(Shape.LORENTZIAN_CUBED, 0.1, 3.0)


def lorentz(r, theta):
    return Drive(Shape.LORENTZIAN_CUBED, r, theta)


# -- 1 ---------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("g,tol", [(20.0, 0.05), (30.0, 0.04)])
def test_c1_static_exponent(g, tol, verdict):
    t0 = time.perf_counter()
    res = packet_probability(ZenerSystem(g))
    elapsed = time.perf_counter() - t0
    err = abs(res.exponent - math.pi * g / 2) / (math.pi * g / 2)
    ok = err < tol and elapsed < 300
    verdict("1", ok, f"g={g:g}: -ln W={res.exponent:.4f} vs {math.pi * g / 2:.4f}, rel {err:.1e} (tol {tol}), {elapsed:.0f} s")
    assert err < tol
    assert elapsed < 300


# -- 2 ---------------------------------------------------------------------


@pytest.mark.xfail(
    strict=True,
    reason="at r = 0.003 the finite-pulse action still differs from the r -> 0 limit by about 1.1% (theta = 0.25) "
    "and 1.8% (theta = 0.5); the gap closes like sqrt(r), see test_semiclassical",
)
@pytest.mark.parametrize("theta", [0.25, 0.5])
def test_c2_closed_form_limit(theta, verdict):
    cf = closed_form_action(theta, 20.0)
    a = action_integral(lorentz(0.003, theta), 20.0).action
    err = abs(a - cf) / cf
    verdict("2", err < 0.01, f"theta={theta}: r=0.003 rel gap {err:.2%} (tol 1%)")
    assert err < 0.01


def test_c2_branch_continuity(verdict):
    g = 20.0
    below = closed_form_action(1.0 - 1e-14, g)
    at = closed_form_action(1.0, g)
    upper = math.pi * g / 2
    err = max(abs(below - upper), abs(at - upper)) / upper
    verdict("2", err < 1e-10, f"branches at theta=1 differ by {err:.1e} (tol 1e-10)")
    assert err < 1e-10


# -- 3 ---------------------------------------------------------------------


@pytest.mark.parametrize("g", [10.0, 20.0, 30.0])
def test_c3_trivial_limit(g, verdict):
    ab = action_integral(NO_DRIVE, g)
    ok = abs(ab.tau0 - 1) < 1e-8 and abs(ab.x_exit - 1) < 1e-8 and abs(ab.action - math.pi * g / 2) < 1e-8 * math.pi * g / 2
    ok = ok and tunneling_time(NO_DRIVE) == 1.0 and exit_point(NO_DRIVE) == 1.0
    verdict("3", ok, f"g={g:g}: tau0={ab.tau0}, x_exit={ab.x_exit}, A-pi g/2={ab.action - math.pi * g / 2:.1e}")
    assert ok


# -- 4 ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def pulse_runs():
    out = {}
    t0 = time.perf_counter()
    for g in (15.0, 20.0, 30.0):
        res = packet_probability(ZenerSystem(g), PULSE)
        out[g] = (res.exponent, action_integral(PULSE, g).action)
    out["elapsed"] = time.perf_counter() - t0
    return out


@pytest.mark.slow
def test_c4_exact_vs_semiclassical(pulse_runs, verdict):
    flags = check_semiclassical(ZenerSystem(20.0), PULSE)
    exact, semi = pulse_runs[20.0]
    err = abs(exact - semi) / semi
    ok = flags.all and err < 0.15
    verdict("4", ok, f"g=20: flags {flags.as_columns()}, exact {exact:.4f} vs A {semi:.4f}, rel {err:.1e} (tol 15%)")
    assert flags.all
    assert err < 0.15


@pytest.mark.slow
def test_c4_improves_with_g(pulse_runs, verdict):
    errs = [abs(pulse_runs[g][0] - pulse_runs[g][1]) / pulse_runs[g][1] for g in (15.0, 20.0, 30.0)]
    ok = errs[0] > errs[1] > errs[2] and pulse_runs["elapsed"] < 1800
    verdict("4", ok, "rel errors g=15,20,30: " + ", ".join(f"{e:.2e}" for e in errs) + f"; {pulse_runs['elapsed']:.0f} s")
    assert errs[0] > errs[1] > errs[2]
    assert pulse_runs["elapsed"] < 1800


# -- 5 ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def incident_samples():
    sys = ZenerSystem(20.0)
    xs = np.linspace(-4.0, -2.0, 200)
    vals = []
    for x in xs:
        w = wavefunction(sys, x)
        # remove the cutoff gauge and the |F''|**(-1/2) amplitude
        vals.append((w.value * np.exp(-1j * gauge_phase(sys))).real * math.sqrt(w.flux_weight))
    return sys.g, xs, np.array(vals)


def phase_fit(X, y, a_guess):
    """Best ``A cos(a X + b)``: linear least squares in (A, b) for each trial ``a``."""

    def residual(a):
        M = np.column_stack([np.cos(a * X), np.sin(a * X)])
        c, *_ = np.linalg.lstsq(M, y, rcond=None)
        return float(np.sum((M @ c - y) ** 2)), c

    grid = np.linspace(0.5 * a_guess, 1.5 * a_guess, 2001)
    a0 = grid[np.argmin([residual(a)[0] for a in grid])]
    step = grid[1] - grid[0]
    a = optimize.minimize_scalar(lambda v: residual(v)[0], bounds=(a0 - step, a0 + step), method="bounded", options={"xatol": 1e-10}).x
    c = residual(a)[1]
    return a, math.atan2(-c[1], c[0])


@pytest.mark.slow
@pytest.mark.xfail(
    strict=True,
    reason="on [-4, -2] the exact phase is (g/4) S(x) with S = |x| sqrt(x^2 - 1) - arccosh|x|, "
    "whose slope in x^2 is about 0.93, so a fit in x^2 cannot return g/4 and -pi/4",
)
def test_c5_phase_fit_in_x_squared(incident_samples, verdict):
    g, xs, y = incident_samples
    a, b = phase_fit(xs**2, y, g / 4)
    ok = abs(a - g / 4) < 0.01 * g / 4 and abs(b + math.pi / 4) < 0.01 * math.pi / 4
    verdict("5", ok, f"fit in x^2: coefficient {a:.4f} (g/4 = {g / 4}), offset {b:.4f} (-pi/4 = {-math.pi / 4:.4f})")
    assert abs(a - g / 4) < 0.01 * g / 4
    assert abs(b + math.pi / 4) < 0.01 * math.pi / 4


@pytest.mark.slow
def test_c5_phase_fit_in_exact_phase(incident_samples, verdict):
    g, xs, y = incident_samples
    a, b = phase_fit(incident_phase(xs), y, g / 4)
    ok = abs(a - g / 4) < 0.01 * g / 4 and abs(b + math.pi / 4) < 0.01 * math.pi / 4
    verdict("5", ok, f"fit in S(x): coefficient {a:.5f}, offset {b:.5f}")
    assert abs(a - g / 4) < 0.01 * g / 4
    assert abs(b + math.pi / 4) < 0.01 * math.pi / 4


# -- 6 ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "pot",
    [square_barrier(2.0, 2.0, edge=0.05), parabolic_barrier(2.0, 1.0), gaussian_bump(2.0, 1.0)],
    ids=["square", "parabolic", "gaussian"],
)
def test_c6_trajectory_equals_wkb(pot, verdict):
    _, A = instanton_bvp(pot, E=0.5)
    ref = wkb_action(pot, 0.5)
    err = abs(A - ref) / ref
    verdict("6", err < 1e-6, f"{pot.name}: rel {err:.1e} (tol 1e-6)")
    assert err < 1e-6


# -- 7 ---------------------------------------------------------------------


@pytest.mark.parametrize("eps", [0.3, 0.5, 0.8])
def test_c7_separable_reduction(eps, verdict):
    b = reference_barrier(0.0, eps)
    path = minimal_path(b)
    ref = wkb_action(Potential1D(b.Vx, b.x0, b.x_max, x_well=b.x0), b.E0)
    err = abs(path.action - ref) / ref
    angles = (path.start_angle, path.end_angle)
    ok = err < 1e-4 and all(abs(a - 90) < 1 for a in angles)
    verdict("7", ok, f"eps={eps}: rel {err:.1e}, angles {angles[0]:.3f}/{angles[1]:.3f} deg")
    assert err < 1e-4
    assert all(abs(a - 90) < 1 for a in angles)


def test_c7_perpendicular_when_coupled(verdict):
    path = minimal_path(reference_barrier(3.0))
    ok = abs(path.start_angle - 90) < 1 and abs(path.end_angle - 90) < 1
    verdict("7", ok, f"lam=3: angles {path.start_angle:.3f}/{path.end_angle:.3f} deg")
    assert ok


# -- 8 ---------------------------------------------------------------------


def test_c8_reference_oracle(verdict):
    r = enhanced_action(reference_barrier(3.0))
    err = abs(r.A1 - ORACLE_A1) / ORACLE_A1
    verdict("8", err < 1e-3, f"A1={r.A1:.6f} vs oracle {ORACLE_A1:.6f}, rel {err:.1e} (tol 1e-3)")
    assert err < 1e-3


def test_c8_resonance(verdict):
    res = resonance_search(reference_barrier(3.0), "lam", (5.0, 12.0), atol=1e-6)
    check = enhanced_action(reference_barrier(res.value)).A1
    ok = abs(res.A1) < 1e-6 and abs(check) < 1e-6
    verdict("8", ok, f"lam*={res.value:.6f}, |A1|={abs(res.A1):.1e}, re-evaluated {abs(check):.1e}")
    assert ok


# -- 9 ---------------------------------------------------------------------


def test_c9_property_suites(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    checks = {}

    t = rng.uniform(0, 100, 500)
    checks["symmetry"] = all(np.array_equal(h_real(Drive(s, 0.2, 1.3), t), h_real(Drive(s, 0.2, 1.3), -t)) for s in Shape)

    ok = True
    for s in Shape:
        d = Drive(s, 0.3, 0.9)
        edge = d.width if s is Shape.LORENTZIAN_CUBED else 1.0
        taus = np.sort(rng.uniform(0, 0.95 * edge, 50))
        vals = [drive_integral(d, x) for x in taus]
        ok = ok and all(b >= a for a, b in zip(vals[:-1], vals[1:]))
    checks["integral monotone"] = ok

    acts = [action_integral(lorentz(r, 0.7), 20.0).action for r in (0.0, 0.001, 0.01, 0.05, 0.1)]
    checks["action monotone"] = all(b <= a for a, b in zip(acts[:-1], acts[1:]))

    sys = ZenerSystem(20.0)
    ref = wavefunction(sys, -3.0)
    ends = default_contour(sys, -3.0).nodes
    alt = ContourSpec((ends[0], -2.5 - 0.3j, -0.5j, 2.5 - 0.3j, ends[-1]), sheet=PRINCIPAL, anchor=0)
    checks["contour"] = abs(wavefunction(sys, -3.0, contour=alt).value - ref.value) < 1e-6 * abs(ref.value)

    a = wavefunction(sys, -3.0, cutoff=30.0).value * np.exp(-1j * gauge_phase(sys, 30.0))
    b = wavefunction(sys, -3.0, cutoff=100.0).value * np.exp(-1j * gauge_phase(sys, 100.0))
    checks["gauge"] = abs(a - b) < 1e-6 * abs(b)

    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 600
    verdict("9", ok, ", ".join(f"{k} {'ok' if v else 'BAD'}" for k, v in checks.items()) + f"; {elapsed:.1f} s")
    assert all(checks.values()), checks
    assert elapsed < 600
