"""Dirichlet energy, its level-set decomposition and the shear rearrangement.

Level quadratures use the midpoint rule in the level c, which never lands
on the extreme values of psi where level sets degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonLaminarError
from .grid import Grid, ScalarField, gradient
from .topology import REGULAR, _Tracer, laminar_check, sublevel_area


def dirichlet_energy(psi: ScalarField) -> float:
    """Half the integral of |grad psi|^2 (rectangle rule in x, trapezoid in y)."""
    gr = gradient(psi)
    return float(0.5 * np.sum((gr.u1 ** 2 + gr.u2 ** 2) * psi.grid.weights))


@dataclass
class LevelRow:
    c: float
    length: float
    flux: float
    mu: float
    slack: float
    regular: bool

    @property
    def relative_slack(self) -> float:
        return self.slack / self.length ** 2 if self.length > 0 else 0.0


@dataclass
class EnergyReport:
    E_direct: float
    E_coarea: float
    lower_bound: float
    E_rearranged: float | None
    rows: list = field(default_factory=list)
    dc: float = 0.0
    excluded_measure: float = 0.0     # total width in c of levels left out


def _levels(psi: ScalarField, n_levels: int):
    lo, hi = float(psi.values.min()), float(psi.values.max())
    dc = (hi - lo) / n_levels
    return lo + (np.arange(n_levels) + 0.5) * dc, dc


def level_rows(psi: ScalarField, n_levels: int = 128) -> tuple[list[LevelRow], float]:
    """Per-level length, flux, travel time and Cauchy-Schwarz slack.

    Values are totals over all components of a level set.  Levels carrying
    a non-regular component get ``regular=False`` and mu = inf.
    """
    if float(np.ptp(psi.values)) == 0.0:
        return [], 0.0
    tr = _Tracer(psi)
    levels, dc = _levels(psi, n_levels)
    rows = []
    for c in levels:
        curves = tr.curves(float(c))
        length = flux = mu = 0.0
        regular = all(cv.classification == REGULAR for cv in curves)
        for cv in curves:
            ell, g = cv._segments()
            length += float(ell.sum())
            flux += float(np.sum(ell * g))
            mu += float(np.sum(ell / g)) if regular else 0.0
        if not regular:
            mu = np.inf
        slack = mu * flux - length ** 2 if regular else np.inf
        rows.append(LevelRow(float(c), length, flux, mu, slack, regular))
    return rows, dc


def coarea_energy(psi: ScalarField, n_levels: int = 128) -> EnergyReport:
    """Energy as half the integral over c of the level flux; also returns the bound."""
    if n_levels < 64:
        raise ValueError("coarea_energy needs at least 64 levels")
    rows, dc = level_rows(psi, n_levels)
    return _report(psi, rows, dc)


def _report(psi, rows, dc, rearranged=None) -> EnergyReport:
    reg = [r for r in rows if r.regular]
    e_co = 0.5 * dc * sum(r.flux for r in reg)
    lb = 0.5 * dc * sum(r.length ** 2 / r.mu for r in reg if r.mu > 0)
    excluded = dc * (len(rows) - len(reg))
    return EnergyReport(dirichlet_energy(psi), e_co, lb, rearranged, rows, dc, excluded)


def cauchy_schwarz_audit(psi: ScalarField, n_levels: int = 128) -> list[LevelRow]:
    """Rows of mu * flux - length^2 (nonnegative by Cauchy-Schwarz) for regular levels."""
    rows, _ = level_rows(psi, n_levels)
    return [r for r in rows if r.regular]


def energy_lower_bound(psi: ScalarField, n_levels: int = 128) -> float:
    """Half the integral over c of length^2 / mu, singular levels excluded."""
    rows, dc = level_rows(psi, n_levels)
    return 0.5 * dc * sum(r.length ** 2 / r.mu for r in rows if r.regular and r.mu > 0)


# -- rearrangement -----------------------------------------------------------------------

def _distribution(lo: np.ndarray, hi: np.ndarray, cell: float):
    """Breakpoints of c -> area{psi <= c} for column segments linear in y.

    A segment with end values lo < hi contributes cell * clip((c-lo)/(hi-lo), 0, 1);
    a flat one contributes a jump of ``cell`` at its value.  Returns the
    level and area sequences, both nondecreasing, with jumps as vertical steps.
    """
    flat = hi <= lo
    s = cell / (hi[~flat] - lo[~flat])
    pts = np.concatenate([lo[~flat], hi[~flat], lo[flat]])
    dslope = np.concatenate([s, -s, np.zeros(flat.sum())])
    jump = np.concatenate([np.zeros(2 * s.size), np.full(flat.sum(), cell)])
    order = np.argsort(pts, kind="stable")
    pts, dslope, jump = pts[order], dslope[order], jump[order]
    slope = np.cumsum(dslope)
    ramp = np.concatenate([[0.0], np.cumsum(slope[:-1] * np.diff(pts))])
    after = ramp + np.cumsum(jump)
    before = after - jump
    c = np.repeat(pts, 2)
    area = np.stack([before, after], 1).ravel()
    return c, np.maximum.accumulate(area)


def _inverse(lo, hi, cell, area):
    c, A = _distribution(lo, hi, cell)
    return np.interp(area, A, c)


def _segments(f: np.ndarray):
    return np.minimum(f[:, :-1], f[:, 1:]), np.maximum(f[:, :-1], f[:, 1:])


def rearranged_shear(psi: ScalarField, check: bool = True) -> ScalarField:
    """The monotone-in-y field with the same distribution function as psi.

    Areas are measured with psi linear in y between nodes of each column.
    If psi has an interior ridge (or trough) the rearrangement keeps one:
    the parts of the channel below and above the ridge are rearranged
    separately, each increasing towards the ridge, and the ridge sits at
    the height that preserves the area of the part below it.
    """
    g = psi.grid
    if check:
        rep = laminar_check(psi, 32)
        if not rep.laminar:
            raise NonLaminarError(f"contractible streamlines at levels {rep.contractible_levels[:3]}")
    f = psi.values
    cell = g.dx * g.dy
    y = g.y
    interior = lambda a: np.all((a > 0) & (a < g.ny - 1))
    if interior(np.argmax(f, axis=1)):
        sign = 1.0
    elif interior(np.argmin(f, axis=1)):
        sign = -1.0
    else:
        lo, hi = _segments(f)
        if f[:, -1].mean() >= f[:, 0].mean():
            prof = _inverse(lo.ravel(), hi.ravel(), cell, 2 * np.pi * (y + 1.0))
        else:
            prof = _inverse(lo.ravel(), hi.ravel(), cell, 2 * np.pi * (1.0 - y))
        return ScalarField(g, np.broadcast_to(prof, g.shape))
    h = sign * f
    r = np.argmax(h, axis=1)
    lo, hi = _segments(h)
    below = np.arange(g.ny - 1)[None, :] < r[:, None]
    y_r = -1.0 + below.sum() * cell / (2.0 * np.pi)
    prof = np.empty(g.ny)
    m = y <= y_r
    prof[m] = _inverse(lo[below], hi[below], cell, 2 * np.pi * (y[m] + 1.0))
    prof[~m] = _inverse(lo[~below], hi[~below], cell, 2 * np.pi * (1.0 - y[~m]))
    return ScalarField(g, np.broadcast_to(sign * prof, g.shape))


def distribution_defect(psi: ScalarField, other: ScalarField, levels=None) -> float:
    """Max over levels of |area{psi <= c} - area{other <= c}|, in grid cells.

    By default the levels are the distinct interior values of ``other``,
    which are the levels a rearrangement built on the same grid samples.
    """
    if levels is None:
        levels = np.unique(other.values)[1:-1]
    cell = psi.grid.dx * psi.grid.dy
    return max(abs(sublevel_area(psi, c) - sublevel_area(other, c)) for c in levels) / cell


def energy_chain(psi: ScalarField, n_levels: int = 128) -> EnergyReport:
    """Direct energy, coarea energy, lower bound and rearranged energy together."""
    rows, dc = level_rows(psi, n_levels)
    star = rearranged_shear(psi)
    return _report(psi, rows, dc, dirichlet_energy(star))


# -- area-preserving test distortions -----------------------------------------------------

@dataclass(frozen=True)
class Wiggle:
    """Time-one flow of the Hamiltonian phi = delta * sin(k x + theta) * (1 - y^2)^2.

    The generated flow is divergence free and tangent to the walls, so its
    time-one map is an area-preserving diffeomorphism of the channel.
    """

    delta: float
    k: int
    theta: float

    def velocity(self, x, y):
        b = (1.0 - y * y) ** 2
        db = -4.0 * y * (1.0 - y * y)
        s = np.sin(self.k * x + self.theta)
        c = np.cos(self.k * x + self.theta)
        return -self.delta * s * db, self.delta * self.k * c * b

    def pullback(self, x, y, steps: int = 64):
        """Preimage of (x, y) under the time-one map (backward RK4)."""
        h = -1.0 / steps
        for _ in range(steps):
            k1 = self.velocity(x, y)
            k2 = self.velocity(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1])
            k3 = self.velocity(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1])
            k4 = self.velocity(x + h * k3[0], y + h * k3[1])
            x = x + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            y = y + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        return x, np.clip(y, -1.0, 1.0)


def wiggled(profile, grid: Grid, wiggle: Wiggle) -> ScalarField:
    """psi = profile(y) transported by the wiggle: profile(Y(x, y)) with Y the preimage height."""
    X, Y = grid.mesh
    _, y0 = wiggle.pullback(X, Y)
    return ScalarField(grid, profile(y0))


def random_wiggles(n: int, seed: int = 0, max_delta: float = 0.08) -> list[Wiggle]:
    rng = np.random.default_rng(seed)
    return [Wiggle(float(rng.uniform(0.02, max_delta)), int(rng.integers(1, 4)),
                   float(rng.uniform(0, 2 * np.pi))) for _ in range(n)]
