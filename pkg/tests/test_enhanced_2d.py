import math

import numpy as np
import pytest

from tunnel_lab.enhanced_2d import (
    Barrier2D,
    enhanced_action,
    equipotential_regions,
    minimal_path,
    normal_action,
    reference_barrier,
    resonance_search,
    sigma_phase,
    wall_roots,
)
from tunnel_lab.errors import NoRootsError, NoSignChangeError, RootOrderError, TopologyError
from tunnel_lab.semiclassical import Potential1D, wkb_action

# tests/oracles/enhanced_reference_oracle.py, lam = 3, eps = 0.5
ORACLE_Y0 = -1.02359255395689
ORACLE_X = 3.05725921143811
ORACLE_A0_FB = 11.7726824687788
ORACLE_A0 = 11.7582940950167
ORACLE_A1 = 5.65816404590258


def no_coupling(x, y, lam):
    return 0.0 * x * y


def flat_strip(eps=0.5):
    # Vy = 0 on a strip; parabolic Vx with a pocket at the wall
    return Barrier2D(lambda x: 4 - (x - 2.5) ** 2, lambda y: 0.0 * y, no_coupling, lam=0.0, E=1.0, eps=eps, x0=0.0, x_max=5.0, y_min=-1.0, y_max=1.0)


def wkb_1d(b, energy):
    # 1D oracle for the x motion with the hard wall at x0
    pot = Potential1D(b.Vx, b.x0, b.x_max, x_well=b.x0)
    return wkb_action(pot, energy)


class TestBarrier:
    def test_eps_positive(self):
        with pytest.raises(ValueError):
            reference_barrier(3.0, 0.0)

    def test_separable_at_zero_coupling(self):
        b = reference_barrier(0.0)
        assert b.V(1.0, 0.7) == b.Vx(1.0) + b.Vy(0.7)

    def test_gradient(self):
        b = reference_barrier(3.0)
        gx, gy = b.grad(0.3, -0.4)
        h = 1e-6
        assert gx == pytest.approx((b.V(0.3 + h, -0.4) - b.V(0.3 - h, -0.4)) / (2 * h), rel=1e-8)
        assert gy == pytest.approx((b.V(0.3, -0.4 + h) - b.V(0.3, -0.4 - h)) / (2 * h), rel=1e-8)


class TestRegions:
    def test_vertical_lines(self):
        R = equipotential_regions(flat_strip())
        (a,), (bc,) = R.a_curves, R.b_curves
        assert np.max(np.abs(a[:, 0] - (2.5 - math.sqrt(2.5)))) < 1e-4
        assert np.max(np.abs(bc[:, 0] - (2.5 + math.sqrt(2.5)))) < 1e-4

    def test_product_form(self):
        # Vx + y**2/8 = E0 on B's boundary at lam = 0
        R = equipotential_regions(reference_barrier(0.0))
        c = R.b_curves[0]
        assert np.max(np.abs(c[:, 0] - (1.5 + np.sqrt(2.5 + c[:, 1] ** 2 / 8)))) < 1e-3

    def test_refinement_converges(self):
        assert equipotential_regions(reference_barrier(3.0)).shift < 1e-3

    def test_no_barrier(self):
        b = reference_barrier(0.0).with_params(E=3.9, eps=0.5)
        with pytest.raises(TopologyError):
            equipotential_regions(b)


class TestNormalAction:
    @pytest.mark.parametrize("eps", [0.25, 0.5, 0.9])
    def test_flat_strip_is_1d(self, eps):
        b = flat_strip(eps)
        assert normal_action(b) == pytest.approx(wkb_1d(b, b.E0), rel=1e-4)

    @pytest.mark.parametrize("eps", [0.3, 0.5])
    def test_separable_reference(self, eps):
        b = reference_barrier(0.0, eps)
        assert normal_action(b) == pytest.approx(wkb_1d(b, b.E0), rel=1e-4)

    def test_quadratic_saddle(self):
        # V = 4 - (x - 5)**2 + y**2/2: straight path along y = 0 with 2 pi (Vb - E0) / omega
        b = Barrier2D(lambda x: 4 - (x - 5.0) ** 2, lambda y: 0.5 * y * y, no_coupling, lam=0.0, E=1.0, eps=0.5, x0=0.0, x_max=10.0, y_min=-3.0, y_max=3.0)
        p = minimal_path(b)
        assert p.action == pytest.approx(2 * math.pi * 2.5 / math.sqrt(2), rel=1e-6)
        assert np.max(np.abs(p.nodes[:, 1])) < 1e-8

    @pytest.mark.parametrize("b", [flat_strip(), reference_barrier(0.0), reference_barrier(3.0)], ids=["flat", "lam0", "lam3"])
    def test_meets_boundaries_normally(self, b):
        p = minimal_path(b)
        assert abs(p.start_angle - 90) < 1 and abs(p.end_angle - 90) < 1
        assert p.grad_norm < 1e-8

    def test_initialization_independence(self):
        b = reference_barrier(3.0)
        acts = [minimal_path(b, seed=s).action for s in (0, 1, 2)]
        assert max(acts) - min(acts) < 1e-5

    def test_pinned_start(self):
        b = reference_barrier(3.0)
        p = minimal_path(b, start=(0.0, ORACLE_Y0))
        assert tuple(p.nodes[0]) == (0.0, ORACLE_Y0)
        assert math.isnan(p.start_angle)
        assert abs(p.end_angle - 90) < 1


class TestSigma:
    def test_touching_roots(self):
        b = reference_barrier(3.0, 3.0)
        y0, y1, _ = wall_roots(b)
        assert y0 == y1
        assert sigma_phase(b) == 0.0

    def test_harmonic_barrier(self):
        # Vy = V0 - w**2 y**2 / 2: X = pi (V0 - eps) / (hbar w)
        V0, w, eps = 2.0, 1.5, 0.5
        b = Barrier2D(lambda x: 4 - (x - 1.5) ** 2, lambda y: V0 - 0.5 * w * w * y * y, no_coupling, lam=0.0, E=1.0, eps=eps, x0=0.0, x_max=5.0, y_min=-4.0, y_max=4.0)
        assert sigma_phase(b) == pytest.approx(math.pi * (V0 - eps) / w, rel=1e-10)

    def test_scaling(self):
        b = reference_barrier(3.0)
        b4 = b.with_params(Vy=lambda y: 0.5 * y * y, lam=12.0, eps=2.0)
        assert wall_roots(b4)[:2] == pytest.approx(wall_roots(b)[:2], abs=1e-12)
        assert sigma_phase(b4) == pytest.approx(2 * sigma_phase(b), rel=1e-10)

    def test_inverted_roots(self):
        with pytest.raises(RootOrderError):
            sigma_phase(reference_barrier(3.0), roots=(1.0, -1.0))

    def test_allowed_interval(self):
        with pytest.raises(RootOrderError):
            sigma_phase(reference_barrier(3.0), roots=(1.2, 1.8))

    def test_no_roots(self):
        b = reference_barrier(0.0).with_params(y_min=-1.0, y_max=1.0)
        with pytest.raises(NoRootsError):
            wall_roots(b)

    @pytest.mark.parametrize("lam", [1.0, 3.0, 6.0])
    def test_real_and_nonnegative(self, lam):
        assert sigma_phase(reference_barrier(lam)) > 0


class TestEnhanced:
    def test_oracle(self):
        r = enhanced_action(reference_barrier(3.0))
        assert r.f_point == pytest.approx((0.0, ORACLE_Y0), abs=1e-10)
        assert r.sigma_mag == pytest.approx(ORACLE_X, rel=1e-10)
        assert r.A0 == pytest.approx(ORACLE_A0, rel=1e-5)
        assert r.A0_fB == pytest.approx(ORACLE_A0_FB, rel=1e-5)
        assert r.A1 == pytest.approx(ORACLE_A1, rel=1e-3)
        assert r.A1 < r.A0_fB
        assert r.W == pytest.approx(math.exp(-r.A1))
        assert r.valid

    def test_no_assistance_without_phase(self):
        b = Barrier2D(lambda x: 4 - (x - 1.5) ** 2, lambda y: 0.3 + 0.5 * y * y, no_coupling, lam=0.0, E=1.0, eps=0.3, x0=0.0, x_max=5.0, y_min=-3.0, y_max=3.0)
        r = enhanced_action(b)
        assert r.sigma_mag == 0.0
        assert r.A1 == r.A0_fB
        assert r.A1 >= r.A0 - 1e-9

    def test_continuity_in_coupling(self):
        lams = np.linspace(3.0, 8.0, 11)
        a1 = np.array([enhanced_action(reference_barrier(l)).A1 for l in lams])
        d = np.diff(a1)
        slope = np.gradient(a1, lams)
        local = 0.5 * (np.abs(slope[1:]) + np.abs(slope[:-1])) * np.diff(lams)
        assert np.all(np.abs(d) <= 10 * local)
        assert np.all(d < 0)


class TestResonance:
    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            resonance_search(reference_barrier(3.0), "lam", (3.0, 5.0))

    def test_bad_param(self):
        with pytest.raises(ValueError):
            resonance_search(reference_barrier(3.0), "E", (0.5, 1.0))

    def test_root(self):
        res = resonance_search(reference_barrier(3.0), "lam", (5.0, 8.0), atol=1e-6)
        assert abs(res.A1) < 1e-6
        again = enhanced_action(reference_barrier(res.value))
        assert abs(again.A1) < 1e-6
        assert res.value == pytest.approx(7.8938, abs=1e-3)
        assert again.W == pytest.approx(1.0, abs=1e-5)
        assert not again.valid and res.outside_validity
