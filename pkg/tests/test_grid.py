import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shearflex.errors import ConfigurationError, GridMismatchError
from shearflex.grid import (ScalarField, VectorField, advect_residual, divergence, gradient,
                            integrate, interpolate_periodic, laplacian, make_grid, perp_gradient)

from conftest import interior


class TestMakeGrid:
    def test_small_grid_spacing(self):
        g = make_grid(8, 9)
        assert g.dx == pytest.approx(np.pi / 4)
        assert g.dy == pytest.approx(0.25)

    @pytest.mark.parametrize("nx, ny", [(8, 8), (7, 9), (6, 9), (8, 7)])
    def test_rejects_bad_sizes(self, nx, ny):
        with pytest.raises(ConfigurationError):
            make_grid(nx, ny)

    def test_fine_grid(self):
        g = make_grid(256, 257)
        assert g.dy == 1 / 128

    def test_y_nodes_symmetric(self):
        g = make_grid(16, 33)
        np.testing.assert_array_equal(g.y, -g.y[::-1])
        assert g.y[0] == -1.0 and g.y[-1] == 1.0


class TestGradient:
    def test_linear_in_y(self, g64):
        X, Y = g64.mesh
        gr = gradient(ScalarField(g64, Y.copy()))
        assert np.max(np.abs(gr.u1)) < 1e-13
        np.testing.assert_allclose(gr.u2, 1.0, atol=1e-12)

    def test_sin_x(self, g64):
        X, Y = g64.mesh
        gr = gradient(ScalarField(g64, np.sin(X)))
        np.testing.assert_allclose(gr.u1, np.cos(X), atol=1e-12)
        assert np.max(np.abs(gr.u2)) < 1e-12

    def test_quartic_exact(self, g256):
        X, Y = g256.mesh
        gr = gradient(ScalarField(g256, Y ** 4))
        err = np.abs(gr.u2 - 4 * Y ** 3)
        assert interior(err).max() <= 1e-10


class TestPerpGradient:
    @pytest.mark.parametrize("psi, u1", [
        (lambda y: -y ** 2 / 2, lambda y: y),
        (lambda y: -y ** 3 / 3, lambda y: y ** 2),
    ])
    def test_shears(self, g128, psi, u1):
        X, Y = g128.mesh
        u = perp_gradient(ScalarField(g128, psi(Y)))
        np.testing.assert_allclose(u.u1, u1(Y), atol=1e-11)
        assert np.max(np.abs(u.u2)) < 1e-12

    def test_solid_body_patch(self, g128):
        X, Y = g128.mesh
        # a periodic stand-in for (x^2 + y^2)/2 whose x part is smooth: compare away from x = 0
        psi = ScalarField(g128, (1 - np.cos(X - np.pi)) + Y ** 2 / 2)
        u = perp_gradient(psi)
        np.testing.assert_allclose(u.u1, -Y, atol=1e-11)
        np.testing.assert_allclose(u.u2, np.sin(X - np.pi), atol=1e-11)


class TestLaplacian:
    def test_sin_x_eigenfunction(self, g64):
        X, Y = g64.mesh
        np.testing.assert_allclose(laplacian(ScalarField(g64, np.sin(X))).values, -np.sin(X), atol=1e-11)

    @pytest.mark.parametrize("compact", [False, True])
    def test_quadratic(self, g64, compact):
        X, Y = g64.mesh
        lap = laplacian(ScalarField(g64, Y ** 2), compact=compact).values
        np.testing.assert_allclose(interior(lap), 2.0, atol=1e-10)

    @pytest.mark.parametrize("compact", [False, True])
    def test_cosine_relative(self, g256, compact):
        X, Y = g256.mesh
        exact = -np.pi ** 2 * np.cos(np.pi * Y)
        lap = laplacian(ScalarField(g256, np.cos(np.pi * Y)), compact=compact).values
        assert np.max(np.abs(lap - exact)) / np.max(np.abs(exact)) <= 1e-6


class TestAdvectResidual:
    def test_couette_exact(self, g64):
        X, Y = g64.mesh
        r = advect_residual(VectorField(g64, Y.copy(), 0 * Y), ScalarField(g64, -np.ones_like(Y)))
        assert r.max_abs() == 0.0

    def test_poiseuille_exact(self, g64):
        X, Y = g64.mesh
        r = advect_residual(VectorField(g64, Y ** 2, 0 * Y), ScalarField(g64, -2 * Y))
        assert r.max_abs() < 1e-14

    def test_grid_mismatch(self, g64, g128):
        with pytest.raises(GridMismatchError):
            advect_residual(VectorField(g64, *np.zeros((2,) + g64.shape)),
                            ScalarField(g128, np.zeros(g128.shape)))


class TestDivergence:
    def test_couette(self, g64):
        X, Y = g64.mesh
        assert divergence(VectorField(g64, Y.copy(), 0 * Y)).max_abs() == 0.0

    def test_x_independent(self, g64):
        X, Y = g64.mesh
        assert divergence(VectorField(g64, np.tanh(3 * Y) + 0 * X, 0 * Y)).max_abs() < 1e-14

    def test_perp_gradient_random_smooth(self, g256, rng):
        X, Y = g256.mesh
        psi = np.zeros_like(X)
        for k in range(1, 5):
            a, b = rng.normal(size=2)
            psi += (a * np.cos(k * X) + b * np.sin(k * X)) * np.cos(k * Y) / k
        u = perp_gradient(ScalarField(g256, psi))
        div = divergence(u).max_abs()
        assert div <= 1e-8 * u.max_abs()


class TestIntegrate:
    def test_constant(self, g64):
        assert integrate(ScalarField(g64, np.ones(g64.shape))) == pytest.approx(4 * np.pi)

    def test_y_squared(self, g256):
        X, Y = g256.mesh
        assert integrate(ScalarField(g256, Y ** 2)) == pytest.approx(4 * np.pi / 3, rel=1e-4)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-1, 1), st.integers(1, 4))
def test_interpolation_error_bound(x, y, k):
    g = make_grid(64, 129)
    X, Y = g.mesh
    f = np.sin(k * X) * (1 + Y)       # linear in y, so only the x error remains
    val = interpolate_periodic(f, g, np.array([x]), np.array([y]))[0]
    assert abs(val - np.sin(k * x) * (1 + y)) <= k ** 2 * g.dx ** 2 / 8 * 2 + 1e-12


def test_interpolation_exact_on_nodes_and_wraps():
    g = make_grid(16, 17)
    X, Y = g.mesh
    f = np.cos(X) + Y
    np.testing.assert_allclose(interpolate_periodic(f, g, X + 2 * np.pi, Y), f, atol=1e-13)
