import numpy as np
import pytest

from shearflex.errors import BlowUpError, CFLViolation, CoreLostError
from shearflex.grid import ScalarField, make_grid
from shearflex.shear import power_law
from shearflex.evolve import (Track, circulation, dealias_mask, fit_frequency, fit_speed,
                              initial_state, poisson_solve_channel, run, step, track_core,
                              truncate)
from shearflex.vortex import BUMP, FlowSpec, VortexSpec, Window, compose_flexible, shear_only


def field(g, f):
    X, Y = g.mesh
    return ScalarField(g, f(X, Y))


class TestPoisson:
    @pytest.mark.parametrize("walls", [(0.0, 0.0), (-0.5, 2.0), (1.0, 1.0)])
    def test_harmonic_is_linear(self, g64, walls):
        psi = poisson_solve_channel(field(g64, lambda X, Y: 0 * X), walls)
        X, Y = g64.mesh
        a, b = walls
        assert np.allclose(psi.values, a + (b - a) * (Y + 1) / 2, atol=1e-12)

    def test_quadratic_is_exact(self, g64):
        # psi = sin(x)(1 - y^2) lies in the kernel of the stencil error
        om = field(g64, lambda X, Y: -np.sin(X) * (1 - Y ** 2) - 2 * np.sin(X))
        psi = poisson_solve_channel(om)
        X, Y = g64.mesh
        assert np.max(np.abs(psi.values - np.sin(X) * (1 - Y ** 2))) < 1e-12

    def test_fourth_order(self):
        errs = []
        for ny in (33, 65, 129):
            g = make_grid(32, ny)
            om = field(g, lambda X, Y: -(4 + np.pi ** 2) * np.cos(2 * X) * np.sin(np.pi * Y))
            psi = poisson_solve_channel(om)
            X, Y = g.mesh
            errs.append(np.max(np.abs(psi.values - np.cos(2 * X) * np.sin(np.pi * Y))))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(rates > 3.5)

    def test_wall_values_imposed(self, g64, rng):
        psi = poisson_solve_channel(ScalarField(g64, rng.standard_normal(g64.shape)), (0.3, -0.7))
        assert np.allclose(psi.values[:, 0], 0.3) and np.allclose(psi.values[:, -1], -0.7)


class TestDealias:
    def test_mask_keeps_two_thirds(self, g64):
        m = dealias_mask(g64)
        assert m.sum() == 64 // 3 + 1

    def test_truncate_idempotent(self, g64, rng):
        a = truncate(rng.standard_normal(g64.shape), g64)
        assert np.allclose(truncate(a, g64), a, atol=1e-14)

    def test_truncate_keeps_low_modes(self, g64):
        X, Y = g64.mesh
        a = np.cos(3 * X) * Y + np.sin(X)
        assert np.allclose(truncate(a, g64), a, atol=1e-13)
        assert np.allclose(truncate(np.cos(30 * X), g64), 0, atol=1e-13)


class TestStepping:
    @pytest.mark.parametrize("profile", [lambda X, Y: -np.ones_like(X), lambda X, Y: -2 * Y])
    def test_shear_is_stationary(self, g64, profile):
        om = field(g64, profile)
        # Couette (omega = -1) and Poiseuille-type (omega = -2y) shears are steady
        psi_ex = poisson_solve_channel(om)
        st = initial_state(om, (psi_ex.values[0, 0], psi_ex.values[0, -1]))
        r = run(st, 1.0, every=0.5)
        assert r.drift() < 1e-10
        assert r.times == pytest.approx([0.0, 0.5, 1.0])

    def test_cfl_violation(self, g64):
        X, Y = g64.mesh
        st = initial_state(field(g64, lambda X, Y: -np.ones_like(X)), (0.0, 0.0))
        from dataclasses import replace
        with pytest.raises(CFLViolation):
            step(replace(st, dt=10 * st.dt))
        assert step(st).t == pytest.approx(st.dt)

    def test_blowup_keeps_partial_result(self, g64):
        om = field(g64, lambda X, Y: np.exp(-((X - np.pi) ** 2 + Y ** 2) / 0.05) * (1 - Y ** 2))
        st = initial_state(om, (0.0, 0.0))
        with pytest.raises(BlowUpError) as info:
            run(st, 1.0, every=0.1, blowup=1.0 + 1e-9)
        assert info.value.result.final is not None and len(info.value.result.frames) >= 1

    def test_circulation_conserved(self, g64):
        om = field(g64, lambda X, Y: np.cos(X) * (1 - Y ** 2) ** 2 - 0.5 * Y)
        st = initial_state(om, (0.0, 0.0))
        r = run(st, 0.5, every=0.25)
        assert abs(r.circulation[-1] - r.circulation[0]) < 1e-8 * max(1.0, abs(r.circulation[0]))
        assert circulation(st.omega) == pytest.approx(r.circulation[0])


class TestTracking:
    def test_synthetic_translation(self, g64):
        X, Y = g64.mesh
        times = np.linspace(0, 4, 9)
        frames = [np.exp(-((np.mod(X - 1 - 0.7 * t + np.pi, 2 * np.pi) - np.pi) ** 2 + (Y - 0.2) ** 2) / 0.02)
                  for t in times]
        tr = track_core(times, frames, g64, 0.0, (1.0, 0.2), 0.4)
        assert fit_speed(tr) == pytest.approx(0.7, abs=0.02)
        assert np.allclose(tr.y, 0.2, atol=0.02)

    def test_synthetic_orbit(self, g128):
        X, Y = g128.mesh
        times = np.linspace(0, 3, 31)
        frames = []
        for t in times:
            cx, cy = np.pi + 0.4 * np.cos(1.3 * t), 0.4 * np.sin(1.3 * t)
            frames.append(np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / 0.005))
        tr = track_core(times, frames, g128, 0.0, (np.pi + 0.4, 0.0), 0.2)
        assert fit_frequency(tr, (np.pi, 0.0)) == pytest.approx(1.3, rel=0.02)

    def test_lost_core(self, g64):
        X, Y = g64.mesh
        blob = np.exp(-((X - 1) ** 2 + Y ** 2) / 0.02)
        frames = [blob, np.zeros_like(blob)]
        with pytest.raises(CoreLostError):
            track_core([0, 1], frames, g64, 0.0, (1.0, 0.0), 0.3)
        tr = track_core([0, 1], frames, g64, 0.0, (1.0, 0.0), 0.3, allow_loss=True)
        assert isinstance(tr, Track) and tr.lost_at == 1 and len(tr.times) == 1

    def test_background_per_frame_length(self, g64):
        with pytest.raises(ValueError):
            track_core([0, 1], [np.ones(g64.shape)] * 2, g64, [np.zeros(g64.shape)], (1.0, 0.0), 0.3)


@pytest.mark.slow
def test_traveling_vortex_drifts_with_window():
    g = make_grid(128, 129)
    v = VortexSpec((np.pi, 0.5), 0.2, 1.0, 2, BUMP)
    flow = FlowSpec(power_law(2), (Window(0.5, 0.2, True),), (v,))
    _, om, psi = compose_flexible(flow, g)
    _, bg, _ = compose_flexible(shear_only(flow), g)
    r = run(initial_state(om, (psi.values[0, 0], psi.values[0, -1])), 2.0, every=0.25)
    tr = track_core(r.times, r.frames, g, truncate(bg.values, g), (np.pi, 0.5), 0.15)
    assert fit_speed(tr) == pytest.approx(0.25, rel=0.05)
