"""Inviscid channel Euler solver in vorticity / stream-function form.

Used only to check that constructed flows behave as claimed: static ones
stay put, traveling ones drift at the window speed and nested vortices
orbit at the parent's plateau rate.  Fourier in x with 2/3 truncation,
4th-order finite differences in y, classical RK4 in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import BlowUpError, CFLViolation, CoreLostError
from .grid import Grid, ScalarField, dx_spectral, dy_fd, dyy_matrix

CFL = 0.5


class ChannelPoisson:
    """Solve (d_xx + D_yy) psi = omega with psi fixed on each wall.

    D_yy is the 4th-order second-derivative stencil with one-sided wall
    rows.  Its interior block is diagonalised once, after which every
    Fourier mode k costs one diagonal division by (lambda - k^2).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        M = dyy_matrix(grid.ny, grid.dy)
        A = M[1:-1, 1:-1]
        lam, V = np.linalg.eig(A)
        if np.max(np.abs(lam.imag)) > 1e-8 * np.max(np.abs(lam)):
            raise RuntimeError("wall-closed second-difference block has complex spectrum")
        order = np.argsort(lam.real)
        self.lam = lam.real[order]
        self.V = V.real[:, order]
        self.Vinv = np.linalg.inv(self.V)
        self.b0 = M[1:-1, 0]
        self.b1 = M[1:-1, -1]
        k = grid.kx
        self.denom = self.lam[None, :] - (k * k)[:, None]

    def solve_hat(self, w_hat: np.ndarray, walls: tuple) -> np.ndarray:
        nx = self.grid.nx
        rhs = w_hat[:, 1:-1].copy()
        rhs[0] -= nx * (self.b0 * walls[0] + self.b1 * walls[1])
        coef = (rhs @ self.Vinv.T) / self.denom
        out = np.zeros_like(w_hat)
        out[:, 1:-1] = coef @ self.V.T
        out[0, 0] = nx * walls[0]
        out[0, -1] = nx * walls[1]
        return out

    def solve(self, omega: np.ndarray, walls: tuple) -> np.ndarray:
        w_hat = np.fft.rfft(omega, axis=0)
        return np.fft.irfft(self.solve_hat(w_hat, walls), n=self.grid.nx, axis=0)


@lru_cache(maxsize=8)
def _poisson(grid: Grid) -> ChannelPoisson:
    return ChannelPoisson(grid)


def poisson_solve_channel(omega: ScalarField, walls: tuple = (0.0, 0.0)) -> ScalarField:
    """Stream function with Laplacian omega and psi(-1) = walls[0], psi(+1) = walls[1]."""
    return ScalarField(omega.grid, _poisson(omega.grid).solve(omega.values, walls))


def dealias_mask(grid: Grid) -> np.ndarray:
    """True for the rfft modes kept by the 2/3 rule."""
    return grid.kx <= grid.nx // 3


def truncate(values: np.ndarray, grid: Grid) -> np.ndarray:
    h = np.fft.rfft(values, axis=0)
    h[~dealias_mask(grid)] = 0.0
    return np.fft.irfft(h, n=grid.nx, axis=0)


@dataclass(frozen=True)
class EvolutionState:
    omega: ScalarField
    walls: tuple
    t: float = 0.0
    dt: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.omega.grid


def initial_state(omega: ScalarField, psi_walls: tuple, dt: float | None = None,
                  cfl: float = CFL) -> EvolutionState:
    """Dealiased start state.

    ``dt`` defaults to 90% of the CFL limit of the initial flow, leaving room
    for the maximum speed to creep up during the run.
    """
    g = omega.grid
    w = ScalarField(g, truncate(omega.values, g))
    state = EvolutionState(w, (float(psi_walls[0]), float(psi_walls[1])), 0.0, 0.0)
    if dt is None:
        dt = 0.9 * cfl * min(g.dx, g.dy) / max(max_speed(state), 1e-300)
    return replace(state, dt=float(dt))


def velocity(omega: np.ndarray, walls: tuple, grid: Grid):
    psi = _poisson(grid).solve(omega, walls)
    return -dy_fd(psi, grid.dy), dx_spectral(psi), psi


def max_speed(state: EvolutionState) -> float:
    u1, u2, _ = velocity(state.omega.values, state.walls, state.grid)
    return float(np.sqrt(np.max(u1 * u1 + u2 * u2)))


def tendency(omega: np.ndarray, walls: tuple, grid: Grid, with_speed: bool = False):
    """-u . grad(omega) with the product truncated to the 2/3 band."""
    u1, u2, _ = velocity(omega, walls, grid)
    n = u1 * dx_spectral(omega) + u2 * dy_fd(omega, grid.dy)
    out = -truncate(n, grid)
    if with_speed:
        return out, float(np.sqrt(np.max(u1 * u1 + u2 * u2)))
    return out


def _advance(state: EvolutionState, dt: float, k1: np.ndarray) -> EvolutionState:
    g, w, walls = state.grid, state.omega.values, state.walls
    k2 = tendency(w + 0.5 * dt * k1, walls, g)
    k3 = tendency(w + 0.5 * dt * k2, walls, g)
    k4 = tendency(w + dt * k3, walls, g)
    new = w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return replace(state, omega=ScalarField(g, new), t=state.t + dt, dt=dt)


def step(state: EvolutionState, cfl: float = CFL) -> EvolutionState:
    """One classical RK4 step; raises CFLViolation if dt exceeds the limit."""
    g = state.grid
    k1, speed = tendency(state.omega.values, state.walls, g, with_speed=True)
    limit = cfl * min(g.dx, g.dy) / max(speed, 1e-300)
    if state.dt > limit * (1 + 1e-12):
        raise CFLViolation(f"dt={state.dt:.4g} exceeds CFL limit {limit:.4g}")
    return _advance(state, state.dt, k1)


def circulation(omega: ScalarField) -> float:
    return float(np.sum(omega.values * omega.grid.weights))


def l2(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(values ** 2 * grid.weights)))


@dataclass
class RunResult:
    times: list = field(default_factory=list)
    frames: list = field(default_factory=list)      # immutable copies of omega
    circulation: list = field(default_factory=list)
    enstrophy: list = field(default_factory=list)
    final: EvolutionState | None = None

    def drift(self) -> float:
        """||omega(T) - omega(0)||_2 / ||omega(0)||_2."""
        g = self.final.grid
        w0 = self.frames[0]
        return l2(self.final.omega.values - w0, g) / l2(w0, g)


def run(state: EvolutionState, t_end: float, every: float | None = None,
        cfl: float = CFL, blowup: float = 20.0) -> RunResult:
    """March to ``t_end``; keep a frame every ``every`` time units (start and end always).

    Each step uses the state's dt, shortened when the current CFL limit
    (with a 10% margin) or the next output time requires it.  BlowUpError
    is raised once the maximum speed exceeds ``blowup`` times its initial
    value, since the shrinking steps would otherwise stall the run.
    """
    res = RunResult()
    g = state.grid
    h_min = min(g.dx, g.dy)

    def keep(s):
        res.times.append(s.t)
        res.frames.append(s.omega.values.copy())
        res.circulation.append(circulation(s.omega))
        res.enstrophy.append(l2(s.omega.values, g))

    keep(state)
    next_keep = every if every else np.inf
    dt = state.dt
    cap = None
    while state.t < t_end - 1e-12:
        k1, speed = tendency(state.omega.values, state.walls, g, with_speed=True)
        if cap is None:
            cap = blowup * max(speed, 1e-300)
        if not np.isfinite(speed) or speed > cap:
            res.final = replace(state, dt=dt)
            exc = BlowUpError(f"max speed {speed:.3g} at t={state.t:.4g} "
                              f"exceeds {blowup:g} times the initial value")
            exc.result = res        # frames kept so far
            raise exc
        limit = 0.9 * cfl * h_min / max(speed, 1e-300)
        h = min(dt, limit, t_end - state.t, next_keep - state.t)
        state = _advance(state, h, k1)
        if abs(state.t - next_keep) < 1e-12 and state.t < t_end - 1e-12:
            keep(state)
            next_keep += every
    keep(state)
    res.final = replace(state, dt=dt)
    return res


# -- vortex core tracking ----------------------------------------------------------------

@dataclass
class Track:
    times: np.ndarray
    x: np.ndarray          # unwrapped
    y: np.ndarray
    speed: float | None = None
    frequency: float | None = None
    lost_at: float | None = None     # set when tracking stopped early


def _centroid(dev: np.ndarray, grid: Grid, mask: np.ndarray):
    X, Y = grid.mesh
    w = dev[mask]
    ang = X[mask]
    cx = np.arctan2(np.sum(w * np.sin(ang)), np.sum(w * np.cos(ang))) % (2 * np.pi)
    cy = float(np.sum(w * Y[mask]) / np.sum(w))
    return float(cx), cy


def track_core(times, frames, grid: Grid, background, start: tuple, radius: float,
               allow_loss: bool = False) -> Track:
    """Follow one vortex core through a sequence of vorticity frames.

    The core is the set of points within ``radius`` of the previous
    centroid whose deviation |omega - background| exceeds half the initial
    peak deviation; the centroid is weighted by that deviation, with a
    circular mean in x.  ``background`` is a field, a scalar, or a sequence
    with one array per frame (e.g. the frames of a control run without the
    tracked vortex, which cancels errors the two runs share).  With
    ``allow_loss`` a lost core ends the track instead of raising.
    """
    if isinstance(background, ScalarField):
        background = background.values
    per_frame = isinstance(background, (list, tuple))
    if per_frame and len(background) != len(frames):
        raise ValueError("need one background frame per vorticity frame")
    X, Y = grid.mesh
    cx, cy = start
    xs, ys = [], []
    thr = None
    for n, (t, w) in enumerate(zip(times, frames)):
        bg = background[n] if per_frame else background
        dev = np.abs(w - bg)
        near = np.hypot(np.mod(X - cx + np.pi, 2 * np.pi) - np.pi, Y - cy) < radius
        if thr is None:
            peak = float(dev[near].max()) if np.any(near) else 0.0
            if peak == 0.0:
                raise CoreLostError("no vorticity deviation near the start point")
            thr = 0.5 * peak
        mask = near & (dev > thr)
        if not np.any(mask):
            if allow_loss and xs:
                return Track(np.asarray(times[:n], dtype=float), np.asarray(xs), np.asarray(ys),
                             lost_at=float(t))
            raise CoreLostError(f"core lost at t={t:.4g}")
        nx_, ny_ = _centroid(dev, grid, mask)
        if xs:
            xs.append(xs[-1] + float(np.mod(nx_ - cx + np.pi, 2 * np.pi) - np.pi))
        else:
            xs.append(nx_)
        ys.append(ny_)
        cx, cy = nx_, ny_
    return Track(np.asarray(times, dtype=float), np.asarray(xs), np.asarray(ys))


def fit_speed(track: Track) -> float:
    track.speed = float(np.polyfit(track.times, track.x, 1)[0])
    return track.speed


def fit_frequency(track: Track, centre: tuple) -> float:
    """Angular speed about a fixed centre from the unwrapped polar angle."""
    dx = np.mod(track.x - centre[0] + np.pi, 2 * np.pi) - np.pi
    ang = np.unwrap(np.arctan2(track.y - centre[1], dx))
    track.frequency = float(np.polyfit(track.times, ang, 1)[0])
    return track.frequency


@dataclass
class OrbitReport:
    expected: float          # plateau angular speed of the parent
    frequency: float         # fitted over the trackable part of the run
    orbits: float            # orbits covered by that part
    t_tracked: float
    t_end: float
    stopped: str | None      # why tracking ended before t_end, if it did
    track: Track


def orbit_experiment(flow, control, grid: Grid, t_end: float, every: float = 0.1,
                     cfl: float = CFL, radius_factor: float = 0.6) -> OrbitReport:
    """Orbit of the first child of ``flow.vortices[0]`` about its parent.

    ``control`` is the same flow with the child removed.  Both are evolved
    and the child is tracked in the difference of the two runs, so errors
    that the parent makes on its own cancel.  A run that blows up or a core
    that is lost ends the measurement early; the report says so.
    """
    from .vortex import compose_flexible

    parent = flow.vortices[0]
    child = parent.children[0]
    runs = []
    stopped = None
    for f in (flow, control):
        _, om, psi = compose_flexible(f, grid)
        st = initial_state(om, (psi.values[0, 0], psi.values[0, -1]), cfl=cfl)
        try:
            runs.append(run(st, t_end, every, cfl))
        except BlowUpError as exc:
            runs.append(exc.result)
            stopped = str(exc)
    n = min(len(r.times) for r in runs)
    if runs[0].times[:n] != runs[1].times[:n]:
        raise ValueError("runs produced different output times")
    tr = track_core(runs[0].times[:n], runs[0].frames[:n], grid, runs[1].frames[:n],
                    child.center, radius_factor * child.radius, allow_loss=True)
    if tr.lost_at is not None:
        stopped = f"child core lost at t={tr.lost_at:.4g}"
    freq = fit_frequency(tr, parent.center) if len(tr.times) >= 3 else float("nan")
    t_tr = float(tr.times[-1])
    return OrbitReport(parent.omega, freq, parent.omega * t_tr / (2 * np.pi), t_tr, t_end,
                       stopped, tr)
