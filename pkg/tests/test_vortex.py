import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from shearflex.errors import ConfigurationError, PlateauViolation, QuiescenceViolation, WindowOverlap
from shearflex.grid import make_grid
from shearflex.shear import power_law, rest
from shearflex.vortex import (BUMP, PLATEAU, FlowSpec, VortexSpec, Window, c2_distance, child_center,
                              closeness, compose_flexible, frequency_list, is_commensurate,
                              nested_quasiperiodic_eval, place_child, poiseuille_composite,
                              stream_G, traveling_wave_eval, vortex_stream, vortex_velocity,
                              vortex_vorticity)


class TestStreamG:
    @pytest.mark.parametrize("r", [0.05, 0.2, 0.5, 0.66])
    def test_solid_core(self, r):
        assert stream_G(PLATEAU, r) == pytest.approx(r * r / 2, rel=1e-12)

    def test_flat_beyond_support(self):
        assert stream_G(PLATEAU, 0.9) == stream_G(PLATEAU, 0.75)

    def test_plateau_increment(self):
        assert stream_G(PLATEAU, 2 / 3) - stream_G(PLATEAU, 1 / 3) == pytest.approx(1 / 6, abs=1e-12)

    @pytest.mark.parametrize("profile", [PLATEAU, BUMP])
    def test_panel_table_agrees_with_quadrature(self, profile):
        for r in (0.1, 0.4, 0.7, 0.74, 0.8):
            assert float(profile.G(r)) == pytest.approx(stream_G(profile, r), abs=1e-12)


class TestVortexVelocity:
    spec = VortexSpec((1.0, 0.1), 0.2, 3.0, 2, PLATEAU)

    def test_outside_support(self):
        for ang in np.linspace(0, 2 * np.pi, 7):
            p = (1.0 + 0.9 * 0.2 * np.cos(ang), 0.1 + 0.9 * 0.2 * np.sin(ang))
            u = vortex_velocity(self.spec, *p)
            assert u[0] == 0.0 and u[1] == 0.0

    def test_plateau_speed(self):
        p = (1.0 + 0.5 * 0.2, 0.1)
        u1, u2 = vortex_velocity(self.spec, *p)
        assert math.hypot(u1, u2) == pytest.approx(3.0 * 0.2 ** 3 * 0.5, rel=1e-14)

    def test_centre(self):
        u1, u2 = vortex_velocity(self.spec, 1.0, 0.1)
        assert u1 == 0.0 and u2 == 0.0

    @pytest.mark.parametrize("profile", [PLATEAU, BUMP])
    def test_stream_velocity_vorticity_consistent(self, profile, rng):
        """u = (-psi_y, psi_x) and omega = lap psi, checked with small central differences."""
        v = VortexSpec((np.pi, 0.0), 0.4, 1.3, 2, profile)
        r = 0.3 * np.sqrt(rng.uniform(0, 1, 200))
        a = rng.uniform(0, 2 * np.pi, 200)
        x, y = np.pi + r * np.cos(a), r * np.sin(a)
        ps = lambda dx, dy: vortex_stream(v, x + dx, y + dy)
        u1, _ = vortex_velocity(v, x, y)
        errs = [np.max(np.abs(-(ps(0, h) - ps(0, -h)) / (2 * h) - u1)) for h in (1e-4, 1e-5)]
        assert errs[1] < 1e-7
        assert errs[0] / errs[1] > 50          # second order: the mismatch is pure FD error
        _, u2 = vortex_velocity(v, x, y)
        np.testing.assert_allclose((ps(1e-5, 0) - ps(-1e-5, 0)) / 2e-5, u2, atol=1e-7)
        h = 1e-4
        lap = (ps(h, 0) + ps(-h, 0) + ps(0, h) + ps(0, -h) - 4 * ps(0, 0)) / h ** 2
        w = vortex_vorticity(v, x, y)
        assert np.max(np.abs(lap - w)) < 1e-4 * np.max(np.abs(w))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.3), st.floats(0.1, 5.0), st.integers(1, 4),
       st.floats(0, 2 * np.pi), st.floats(0.751, 3.0), st.sampled_from([PLATEAU, BUMP]))
def test_support_identity(eps, amp, n, ang, rho, profile):
    v = VortexSpec((2.0, 0.0), eps, amp, n, profile)
    p = (2.0 + rho * eps * np.cos(ang), rho * eps * np.sin(ang))
    assert vortex_velocity(v, *p) == (0.0, 0.0)
    assert vortex_stream(v, np.array(p[0]), np.array(p[1])) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.3), st.floats(0.1, 5.0), st.integers(1, 4),
       st.floats(0, 2 * np.pi), st.floats(0.0, 2 / 3))
def test_solid_body_core(eps, amp, n, ang, rho):
    v = VortexSpec((2.0, 0.0), eps, amp, n, PLATEAU)
    r = rho * eps
    u1, u2 = vortex_velocity(v, 2.0 + r * np.cos(ang), r * np.sin(ang))
    assert math.hypot(u1, u2) == pytest.approx(v.omega * r, rel=1e-12, abs=1e-15)


class TestCompose:
    def test_outside_window_is_shear(self, g128):
        u, _, _ = compose_flexible(poiseuille_composite(0.1), g128)
        X, Y = g128.mesh
        far = np.abs(Y) >= 0.2
        np.testing.assert_allclose(u.u1[far], Y[far] ** 2, atol=1e-15)
        assert np.all(u.u2[far] == 0.0)

    def test_plain_shear(self, g64):
        u, om, psi = compose_flexible(FlowSpec(power_law(2)), g64)
        X, Y = g64.mesh
        np.testing.assert_allclose(u.u1, Y ** 2, atol=1e-15)
        np.testing.assert_allclose(om.values, -2 * Y, atol=1e-14)
        np.testing.assert_allclose(psi.values, -(Y ** 3 + 1) / 3, atol=1e-14)

    def test_vortex_in_moving_fluid(self, g64):
        flow = FlowSpec(power_law(2), (), (VortexSpec((1.0, 0.5), 0.1),))
        with pytest.raises(QuiescenceViolation):
            compose_flexible(flow, g64)

    def test_overlapping_windows(self, g64):
        flow = FlowSpec(power_law(2), (Window(0.0, 0.2), Window(0.3, 0.1)))
        with pytest.raises(WindowOverlap):
            compose_flexible(flow, g64)

    def test_vortex_touching_wall(self):
        from shearflex.vortex import validate_flow
        with pytest.raises(QuiescenceViolation):
            validate_flow(FlowSpec(rest(), (), (VortexSpec((1.0, 0.8), 0.4),)))


class TestTraveling:
    flow = FlowSpec(power_law(2), (Window(0.5, 0.2, traveling=True),),
                    (VortexSpec((1.0, 0.5), 0.2, 1.0, 2, BUMP),))

    def test_initial_time_is_static(self, g64):
        X, Y = g64.mesh
        u, _, _ = compose_flexible(self.flow, g64)
        a, b = traveling_wave_eval(self.flow, 0.0, X, Y)
        np.testing.assert_array_equal(a, u.u1)
        np.testing.assert_array_equal(b, u.u2)

    @pytest.mark.parametrize("t", [0.0, 0.7, 3.1])
    def test_far_field(self, t):
        y = np.array([-0.9, -0.5, 0.0, 0.05, 0.95])
        a, b = traveling_wave_eval(self.flow, t, np.full_like(y, 2.0), y)
        np.testing.assert_allclose(a, y ** 2, atol=1e-15)
        assert np.all(b == 0)

    @pytest.mark.parametrize("t", [0.5, 2.0, 9.0])
    def test_core_drifts_with_window_speed(self, t):
        # velocity at the predicted core equals the window speed
        x = (1.0 + 0.25 * t) % (2 * np.pi)
        a, b = traveling_wave_eval(self.flow, t, np.array([x]), np.array([0.5]))
        assert a[0] == pytest.approx(0.25, abs=1e-14) and b[0] == pytest.approx(0.0, abs=1e-14)


def _nested(omega_ratio=math.sqrt(2)):
    parent0 = VortexSpec((np.pi, 0.0), 0.9, 1.0, 2, PLATEAU)
    ce = 0.9 / 8
    # child plateau speed = ratio * parent plateau speed
    amp = omega_ratio * parent0.omega / ce ** 2
    child = place_child(parent0, 0.45, 0.3, ce, amp, 2, PLATEAU)
    return VortexSpec(parent0.center, 0.9, 1.0, 2, PLATEAU, (child,)), child


class TestNested:
    def test_initial_time_is_superposition(self, g64):
        parent, child = _nested()
        X, Y = g64.mesh
        a, b = nested_quasiperiodic_eval(parent, 0.0, X, Y)
        p1, p2 = vortex_velocity(parent, X, Y)
        c1, c2 = vortex_velocity(child, X, Y)
        np.testing.assert_allclose(a, p1 + c1, atol=1e-15)
        np.testing.assert_allclose(b, p2 + c2, atol=1e-15)

    @pytest.mark.parametrize("t", [0.3, 1.0, 4.0])
    def test_child_centre_moves_rigidly(self, t):
        parent, child = _nested()
        cx, cy = child_center(parent, child, t)
        a, b = nested_quasiperiodic_eval(parent, t, np.array([cx]), np.array([cy]))
        # at the child centre only the parent's solid-body rotation acts
        rx, ry = cx - parent.center[0], cy - parent.center[1]
        assert a[0] == pytest.approx(-parent.omega * ry, abs=1e-13)
        assert b[0] == pytest.approx(parent.omega * rx, abs=1e-13)

    def test_tracer_never_returns(self):
        parent, child = _nested()
        r0 = 0.3 * child.eps
        p0 = np.array([child.center[0] + r0, child.center[1]])

        def rhs(t, p):
            a, b = nested_quasiperiodic_eval(parent, t, np.array([p[0]]), np.array([p[1]]))
            return [a[0], b[0]]

        period = 2 * np.pi / parent.omega
        ts = period * np.arange(1, 51)
        sol = solve_ivp(rhs, (0, ts[-1]), p0, t_eval=ts, rtol=1e-10, atol=1e-12, method="DOP853")
        gaps = np.hypot(sol.y[0] - p0[0], sol.y[1] - p0[1])
        # closed form: at whole outer periods the tracer sits at angle 2 pi k sqrt(2) about the child
        k = np.arange(1, 51)
        exact = 2 * r0 * np.abs(np.sin(np.pi * k * math.sqrt(2)))
        np.testing.assert_allclose(gaps, exact, atol=1e-6)
        assert gaps.min() > 0.01 * r0

    def test_child_must_sit_on_plateau(self):
        parent0 = VortexSpec((np.pi, 0.0), 0.9, 1.0, 2, PLATEAU)
        with pytest.raises(PlateauViolation):
            VortexSpec(parent0.center, 0.9, 1.0, 2, PLATEAU,
                       (place_child(parent0, 0.15, 0.0, 0.1),))

    def test_bump_parent_has_no_plateau(self):
        parent0 = VortexSpec((np.pi, 0.0), 0.9, 1.0, 2, BUMP)
        with pytest.raises(PlateauViolation):
            VortexSpec(parent0.center, 0.9, 1.0, 2, BUMP, (place_child(parent0, 0.45, 0.0, 0.05),))


class TestFrequencies:
    def test_single(self):
        freqs, flags = frequency_list(VortexSpec((1.0, 0.0), 0.2, 3.0, 2))
        assert freqs == [pytest.approx(3.0 * 0.04)] and flags == {}

    def test_sqrt2_is_incommensurate(self):
        parent, _ = _nested(math.sqrt(2))
        freqs, flags = frequency_list(parent)
        assert freqs[1] / freqs[0] == pytest.approx(math.sqrt(2))
        assert flags == {(0, 1): False}

    def test_integer_ratio_is_commensurate(self):
        parent, _ = _nested(2.0)
        assert frequency_list(parent)[1] == {(0, 1): True}
        assert is_commensurate(1.5, 4.5)


class TestDistances:
    def test_closeness_decreases_along_sweep(self):
        totals = [closeness(poiseuille_composite(e), 0.5)["total"] for e in (0.2, 0.1, 0.05, 0.025)]
        assert all(b < a for a, b in zip(totals, totals[1:]))

    def test_c2_zero_for_the_shear_itself(self, g64):
        u, _, _ = compose_flexible(FlowSpec(power_law(2)), g64)
        X, Y = g64.mesh
        assert c2_distance(u, (Y ** 2, 0 * Y))["total"] < 1e-9

    def test_bad_vortex(self):
        with pytest.raises(ConfigurationError):
            VortexSpec((0.0, 0.0), -0.1)
