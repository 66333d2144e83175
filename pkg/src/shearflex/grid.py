"""Fields on the periodic channel T x [-1, 1] and their discrete calculus.

x is periodic on [0, 2*pi) and differentiated spectrally; y runs over
[-1, 1] including both walls and is differentiated with 4th-order finite
differences (one-sided 4th-order closures at the walls).  Arrays are
stored row-major with shape ``(nx, ny)``: row = x index, column = y index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, GridMismatchError

# 4th-order first-derivative stencils (times 1/(12 h)).
_D1_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D1_WALL0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_WALL1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0

# 4th-order compact second-derivative stencils (times 1/(12 h^2)).
_D2_INTERIOR = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D2_WALL0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_WALL1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


@dataclass(frozen=True)
class Grid:
    """Tensor grid: ``nx`` periodic samples in x, ``ny`` samples in y."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 8 or self.nx % 2:
            raise ConfigurationError(f"nx must be even and >= 8, got {self.nx}")
        if self.ny < 9 or self.ny % 2 == 0:
            raise ConfigurationError(f"ny must be odd and >= 9, got {self.ny}")

    @property
    def dx(self) -> float:
        return 2.0 * np.pi / self.nx

    @property
    def dy(self) -> float:
        return 2.0 / (self.ny - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @cached_property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        # (j - m)/m keeps the grid exactly antisymmetric with exact walls
        m = (self.ny - 1) // 2
        return (np.arange(self.ny) - m) / m

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kx(self) -> np.ndarray:
        """Integer wavenumbers for ``rfft`` along x."""
        return np.arange(self.nx // 2 + 1, dtype=float)

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights: rectangle rule in x, trapezoid in y."""
        wy = np.full(self.ny, self.dy)
        wy[0] = wy[-1] = 0.5 * self.dy
        return np.broadcast_to(self.dx * wy, self.shape)

    def area(self) -> float:
        return 4.0 * np.pi

    def sample(self, func) -> "ScalarField":
        """Evaluate ``func(X, Y)`` on the mesh."""
        X, Y = self.mesh
        return ScalarField(self, np.asarray(func(X, Y), dtype=float) + np.zeros(self.shape))


def make_grid(nx: int, ny: int) -> Grid:
    return Grid(int(nx), int(ny))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ConfigurationError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def __add__(self, other):
        _check_same(self.grid, other.grid)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same(self.grid, other.grid)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, scale: float):
        return ScalarField(self.grid, self.values * scale)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        for name in ("u1", "u2"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise ConfigurationError(f"{name} shape {a.shape} does not match grid {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise ConfigurationError(f"{name} contains non-finite values")
            object.__setattr__(self, name, a)

    def __add__(self, other):
        _check_same(self.grid, other.grid)
        return VectorField(self.grid, self.u1 + other.u1, self.u2 + other.u2)

    def __sub__(self, other):
        _check_same(self.grid, other.grid)
        return VectorField(self.grid, self.u1 - other.u1, self.u2 - other.u2)

    def speed(self) -> np.ndarray:
        return np.hypot(self.u1, self.u2)

    def max_abs(self) -> float:
        return float(np.max(self.speed()))


def _check_same(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


# -- 1D building blocks (operate on the last axis / axis 0) -----------------

def dx_spectral(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Fourier derivative along axis 0 on [0, 2*pi); Nyquist mode dropped."""
    n = values.shape[0]
    fh = np.fft.rfft(values, axis=0)
    k = np.arange(n // 2 + 1, dtype=float)
    mult = (1j * k) ** order
    mult[-1] = 0.0
    shape = (-1,) + (1,) * (values.ndim - 1)
    return np.fft.irfft(fh * mult.reshape(shape), n=n, axis=0)


def _apply_stencil(f: np.ndarray, interior, wall0, wall1, h: float, parity: float) -> np.ndarray:
    """Apply a 5-point interior stencil with one-sided wall closures along the last axis.

    ``parity`` is -1 for odd derivatives (closure weights flip sign at the
    upper wall) and +1 for even ones.
    """
    out = np.empty_like(f)
    n = f.shape[-1]
    acc = np.zeros(f[..., 2:n - 2].shape)
    for s, w in zip(range(-2, 3), interior):
        if w:
            acc += w * f[..., 2 + s:n - 2 + s]
    out[..., 2:n - 2] = acc
    m0, m1 = len(wall0), len(wall1)
    out[..., 0] = f[..., :m0] @ wall0
    out[..., 1] = f[..., :m1] @ wall1
    out[..., n - 1] = parity * (f[..., n - m0:][..., ::-1] @ wall0)
    out[..., n - 2] = parity * (f[..., n - m1:][..., ::-1] @ wall1)
    return out


def dy_fd(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order first derivative along the last axis with spacing ``h``."""
    return _apply_stencil(values, _D1_INTERIOR, _D1_WALL0, _D1_WALL1, h, -1.0) / h


def dyy_compact(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order 5-point second derivative along the last axis."""
    return _apply_stencil(values, _D2_INTERIOR, _D2_WALL0, _D2_WALL1, h, 1.0) / (h * h)


def dyy_matrix(n: int, h: float) -> np.ndarray:
    """Dense matrix of :func:`dyy_compact` (used by the Poisson solver)."""
    return dyy_compact(np.eye(n), h).T


# -- field operators ---------------------------------------------------------

def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    return VectorField(g, dx_spectral(f.values), dy_fd(f.values, g.dy))


def perp_gradient(psi: ScalarField) -> VectorField:
    """Velocity u = (-d_y psi, d_x psi) of a stream function."""
    g = psi.grid
    return VectorField(g, -dy_fd(psi.values, g.dy), dx_spectral(psi.values))


def divergence(u: VectorField) -> ScalarField:
    g = u.grid
    return ScalarField(g, dx_spectral(u.u1) + dy_fd(u.u2, g.dy))


def laplacian(f: ScalarField, compact: bool = False) -> ScalarField:
    """Discrete Laplacian.

    By default this is exactly ``divergence(gradient(f))``: the spectral
    x-derivative and the 4th-order y-stencil are each applied twice.  With
    ``compact=True`` the y part uses the 5-point second-derivative stencil
    instead (the operator inverted by the channel Poisson solver).
    """
    g = f.grid
    if compact:
        return ScalarField(g, dx_spectral(f.values, 2) + dyy_compact(f.values, g.dy))
    return divergence(gradient(f))


def advect_residual(u: VectorField, w: ScalarField) -> ScalarField:
    """Pointwise u . grad(w); vanishes for a steady Euler pair (u, omega)."""
    _check_same(u.grid, w.grid)
    gw = gradient(w)
    return ScalarField(w.grid, u.u1 * gw.u1 + u.u2 * gw.u2)


def second_derivatives(f: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(f_xx, f_xy, f_yy) with the composed first-derivative operators."""
    fx = dx_spectral(f)
    fy = dy_fd(f, grid.dy)
    return dx_spectral(fx), dy_fd(fx, grid.dy), dy_fd(fy, grid.dy)


def integrate(f: ScalarField) -> float:
    """Integral over the channel: exact in x for trigonometric content, trapezoid in y."""
    return float(np.sum(f.values * f.grid.weights))


def interpolate_periodic(values: np.ndarray, grid: Grid, px, py) -> np.ndarray:
    """Bilinear interpolation at points (px, py); x wraps, y is clamped to the walls."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    sx = np.mod(px, 2.0 * np.pi) / grid.dx
    i0 = np.floor(sx).astype(int)
    tx = sx - i0
    i0 %= grid.nx
    i1 = (i0 + 1) % grid.nx
    sy = np.clip((py + 1.0) / grid.dy, 0.0, grid.ny - 1.0)
    j0 = np.minimum(np.floor(sy).astype(int), grid.ny - 2)
    ty = sy - j0
    j1 = j0 + 1
    return ((1 - tx) * (1 - ty) * values[i0, j0] + tx * (1 - ty) * values[i1, j0]
            + (1 - tx) * ty * values[i0, j1] + tx * ty * values[i1, j1])
