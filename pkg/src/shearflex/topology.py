"""Streamline topology of stream functions sampled on the periodic channel.

Level curves are traced with marching squares on the x-periodic grid.
Every crossing point remembers the grid edge it lies on and its position
``t`` along that edge, so any nodal quantity (notably |grad psi|) can be
interpolated onto the curve exactly the way the point itself was.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import EmptyBandError, LevelOutOfRange, NotRegularError
from .grid import Grid, ScalarField, VectorField, dx_spectral, dy_fd, gradient

TWO_PI = 2.0 * np.pi
REGULAR = "regular"
MIXED = "regular-singular"
SINGULAR = "singular"
TAU_REL = 1e-6
# minimum det(H) / tr(H)^2 for a grid extremum to count as a vortex core
HESSIAN_RATIO = 0.05

# Segment table: corner bits a=1 (i,j), b=2 (i+1,j), c=4 (i+1,j+1), d=8 (i,j+1);
# local edges 0 = a-b, 1 = b-c, 2 = d-c, 3 = a-d.
_SEGMENTS = {
    1: [(0, 3)], 2: [(0, 1)], 3: [(1, 3)], 4: [(1, 2)], 6: [(0, 2)], 7: [(2, 3)],
    8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(0, 3)],
}
# saddles: (centre below, centre above)
_SADDLES = {
    5: ([(0, 3), (1, 2)], [(0, 1), (2, 3)]),
    10: ([(0, 1), (2, 3)], [(0, 3), (1, 2)]),
}


@dataclass
class LevelCurve:
    level: float
    points: np.ndarray          # (N, 2), x in [0, 2*pi)
    edges: np.ndarray           # global edge id of every point
    ts: np.ndarray              # position along that edge
    grad: np.ndarray            # |grad psi| interpolated at every point
    closed: bool
    winding: int
    classification: str = REGULAR
    grad_min: float = 0.0
    grad_max: float = 0.0

    @property
    def contractible(self) -> bool:
        return self.winding == 0

    def _segments(self):
        p = self.points
        if self.closed:
            q = np.roll(p, -1, axis=0)
            g = 0.5 * (self.grad + np.roll(self.grad, -1))
        else:
            p, q = p[:-1], p[1:]
            g = 0.5 * (self.grad[:-1] + self.grad[1:])
        dx = np.mod(q[:, 0] - p[:, 0] + np.pi, TWO_PI) - np.pi
        return np.hypot(dx, q[:, 1] - p[:, 1]), g

    @property
    def length(self) -> float:
        return float(self._segments()[0].sum())

    def flux(self) -> float:
        """Polyline quadrature of the closed-loop integral of |grad psi|."""
        ell, g = self._segments()
        return float(np.sum(ell * g))


class _Tracer:
    """Marching squares on one field; reusable across levels."""

    def __init__(self, psi: ScalarField, gmag: np.ndarray | None = None):
        self.grid = psi.grid
        self.f = psi.values
        gr = gradient(psi)
        self.gx, self.gy = gr.u1, gr.u2
        if gmag is None:
            gmag = gr.speed()
        self.gmag = gmag
        self.tau = TAU_REL * float(gmag.max())
        nx, ny = self.grid.shape
        self.nh = nx * ny

    # global edge ids
    def _h(self, i, j):
        return i * self.grid.ny + j

    def _v(self, i, j):
        return self.nh + i * (self.grid.ny - 1) + j

    def _edge_nodes(self, e: np.ndarray):
        nx, ny = self.grid.shape
        horiz = e < self.nh
        i0 = np.where(horiz, e // ny, (e - self.nh) // (ny - 1))
        j0 = np.where(horiz, e % ny, (e - self.nh) % (ny - 1))
        i1 = np.where(horiz, (i0 + 1) % nx, i0)
        j1 = np.where(horiz, j0, j0 + 1)
        return horiz, i0, j0, i1, j1

    def segments(self, c: float):
        f = self.f
        nx, ny = self.grid.shape
        above = f >= c
        a = above[:, :-1]
        b = np.roll(above, -1, axis=0)[:, :-1]
        cc = np.roll(above, -1, axis=0)[:, 1:]
        d = above[:, 1:]
        case = a * 1 + b * 2 + cc * 4 + d * 8
        ii, jj = np.nonzero((case > 0) & (case < 15))
        if ii.size == 0:
            return np.zeros((0, 2), dtype=np.int64)
        cases = case[ii, jj]
        ip = (ii + 1) % nx
        local = np.stack([self._h(ii, jj), self._v(ip, jj), self._h(ii, jj + 1), self._v(ii, jj)], 1)
        centre = 0.25 * (f[ii, jj] + f[ip, jj] + f[ip, jj + 1] + f[ii, jj + 1]) >= c
        pairs = []
        for k, cs in enumerate(cases):
            if cs in _SADDLES:
                segs = _SADDLES[cs][int(centre[k])]
            else:
                segs = _SEGMENTS[cs]
            for e0, e1 in segs:
                pairs.append((local[k, e0], local[k, e1]))
        return np.array(pairs, dtype=np.int64)

    def curves(self, c: float) -> list[LevelCurve]:
        segs = self.segments(c)
        if len(segs) == 0:
            return []
        adj: dict[int, list[int]] = {}
        for s, (e0, e1) in enumerate(segs):
            adj.setdefault(int(e0), []).append(s)
            adj.setdefault(int(e1), []).append(s)
        used = np.zeros(len(segs), dtype=bool)
        chains = []
        # open chains start at edges of degree one (walls); then loops
        starts = [e for e, ss in adj.items() if len(ss) == 1] + list(adj)
        for e_start in starts:
            free = [s for s in adj[e_start] if not used[s]]
            if not free:
                continue
            chain = [e_start]
            e = e_start
            s = free[0]
            while True:
                used[s] = True
                e0, e1 = segs[s]
                e = int(e1) if int(e0) == e else int(e0)
                if e == e_start:
                    chains.append((chain, True))
                    break
                chain.append(e)
                nxt = [q for q in adj[e] if not used[q]]
                if not nxt:
                    chains.append((chain, False))
                    break
                s = nxt[0]
        return [self._make_curve(c, np.array(ch), closed) for ch, closed in chains]

    def _make_curve(self, c: float, edges: np.ndarray, closed: bool) -> LevelCurve:
        g = self.grid
        horiz, i0, j0, i1, j1 = self._edge_nodes(edges)
        f0 = self.f[i0, j0]
        f1 = self.f[i1, j1]
        t = (c - f0) / (f1 - f0)
        x = np.where(horiz, (i0 + t) * g.dx, i0 * g.dx) % TWO_PI
        y = np.where(horiz, g.y[j0], g.y[j0] + t * g.dy)
        pts = np.stack([x, y], 1)
        # interpolate the gradient itself, then take its length
        gx = (1 - t) * self.gx[i0, j0] + t * self.gx[i1, j1]
        gy = (1 - t) * self.gy[i0, j0] + t * self.gy[i1, j1]
        gm = np.hypot(gx, gy)
        steps = np.diff(x, append=x[0] if closed else x[-1])
        winding = int(round(np.sum(np.mod(steps + np.pi, TWO_PI) - np.pi) / TWO_PI))
        curve = LevelCurve(c, pts, edges, t, gm, closed, winding)
        _label(curve, self.tau)
        return curve


def _label(curve: LevelCurve, tau: float) -> None:
    curve.grad_min = float(curve.grad.min())
    curve.grad_max = float(curve.grad.max())
    if curve.grad_min > tau:
        curve.classification = REGULAR
    elif curve.grad_max <= tau:
        curve.classification = SINGULAR
    else:
        curve.classification = MIXED


def extract_level_curves(psi: ScalarField, c: float, strict: bool = True) -> list[LevelCurve]:
    """All connected components of {psi = c} as polylines.

    With ``strict`` the level must lie strictly between min and max of psi;
    otherwise the closed range is allowed, which is how degenerate level
    sets such as a stagnant midline are reached.
    """
    lo, hi = float(psi.values.min()), float(psi.values.max())
    ok = lo < c < hi if strict else lo <= c <= hi
    if not ok:
        raise LevelOutOfRange(f"level {c} outside field range [{lo}, {hi}]")
    return _Tracer(psi).curves(c)


def classify_streamline(curve: LevelCurve, grad: VectorField, tau: float | None = None) -> str:
    """Regular / regular-singular / singular from |grad psi| along the curve."""
    speed = grad.speed()
    if tau is None:
        tau = TAU_REL * float(speed.max())
    g = grad.grid
    tr = _Tracer.__new__(_Tracer)
    tr.grid, tr.nh = g, g.nx * g.ny
    _, i0, j0, i1, j1 = tr._edge_nodes(curve.edges)
    vals = (1 - curve.ts) * speed[i0, j0] + curve.ts * speed[i1, j1]
    if vals.min() > tau:
        return REGULAR
    if vals.max() <= tau:
        return SINGULAR
    return MIXED


def travel_time(psi: ScalarField, curve: LevelCurve) -> float:
    """Period of revolution along a regular streamline: the loop integral of dl/|grad psi|."""
    if curve.classification != REGULAR:
        raise NotRegularError(f"curve at level {curve.level} is {curve.classification}")
    ell, g = curve._segments()
    return float(np.sum(ell / g))


# -- laminarity ----------------------------------------------------------------------

def _neighbours(f: np.ndarray):
    """Stack of the 8 neighbours of every interior-in-y node (x wraps)."""
    out = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                out.append(np.roll(f, -di, axis=0)[:, 1 + dj:f.shape[1] - 1 + dj])
    return np.stack(out)


def core_levels(psi: ScalarField) -> list[float]:
    """Levels just inside every nondegenerate grid extremum of psi.

    A node counts when it beats all 8 neighbours strictly and the
    discrete Hessian there is definite (det >= HESSIAN_RATIO * tr^2), which
    separates vortex cores from the jitter of nodes along a curved ridge.
    The returned level sits halfway to the nearest neighbour value.
    """
    f = psi.values
    g = psi.grid
    nb = _neighbours(f)
    mid = f[:, 1:-1]
    is_max = np.all(mid > nb, axis=0)
    is_min = np.all(mid < nb, axis=0)
    ii, jj = np.nonzero(is_max | is_min)
    if ii.size == 0:
        return []
    fxx = dx_spectral(f, 2)
    fx = dx_spectral(f)
    fxy = dy_fd(fx, g.dy)
    fyy = dy_fd(dy_fd(f, g.dy), g.dy)
    levels = []
    for i, j in zip(ii, jj + 1):
        h11, h12, h22 = fxx[i, j], fxy[i, j], fyy[i, j]
        tr = h11 + h22
        if h11 * h22 - h12 * h12 < HESSIAN_RATIO * tr * tr:
            continue
        n = nb[:, i, j - 1]
        nearest = n.max() if is_max[i, j - 1] else n.min()
        levels.append(0.5 * (f[i, j] + nearest))
    return levels


@dataclass
class LaminarReport:
    laminar: bool
    n_levels: int
    n_curves: int
    contractible_levels: list = field(default_factory=list)
    core_levels: int = 0


def laminar_check(psi: ScalarField, n_levels: int = 128) -> LaminarReport:
    """True iff every sampled level curve winds around the channel.

    Levels are spaced uniformly over the open range of psi, supplemented by
    one level hugging each vortex-like extremum: a compact vortex changes
    psi by far less than the uniform spacing and would otherwise be missed.
    """
    if n_levels < 32:
        raise ValueError("laminar_check needs at least 32 levels")
    lo, hi = float(psi.values.min()), float(psi.values.max())
    if hi - lo == 0.0:
        return LaminarReport(True, 0, 0)
    tr = _Tracer(psi)
    uniform = lo + (np.arange(n_levels) + 0.5) * (hi - lo) / n_levels
    extra = core_levels(psi)
    bad, count = [], 0
    for c in list(uniform) + extra:
        cs = tr.curves(float(c))
        count += len(cs)
        if any(cv.winding == 0 for cv in cs):
            bad.append(float(c))
    return LaminarReport(not bad, len(uniform) + len(extra), count, bad, len(extra))


# -- fluid sub-domains -----------------------------------------------------------------

@dataclass
class SubdomainRecord:
    c0: float
    c_minus: float
    c_plus: float
    lower: LevelCurve | None    # None: the band runs into a wall / the range end
    upper: LevelCurve | None
    certified: bool
    n_sampled: int
    seed_point: tuple = (0.0, 0.0)


def critical_levels(psi: ScalarField, gmag: np.ndarray | None = None) -> np.ndarray:
    """Values of psi at nodes where |grad psi| is below the singularity threshold."""
    if gmag is None:
        gmag = gradient(psi).speed()
    tau = TAU_REL * float(gmag.max())
    return np.unique(psi.values[gmag <= tau])


def _nearest(curves: list[LevelCurve], ref: cKDTree) -> LevelCurve | None:
    best, best_d = None, np.inf
    for cv in curves:
        d = float(np.median(ref.query(_unwrap_for_tree(cv.points))[0]))
        if d < best_d:
            best, best_d = cv, d
    return best


def _unwrap_for_tree(p: np.ndarray) -> np.ndarray:
    # embed x on a circle so the seam does not split neighbours
    r = 1.0
    return np.stack([r * np.cos(p[:, 0]), r * np.sin(p[:, 0]), p[:, 1]], 1)


def find_subdomain(psi: ScalarField, c0: float, n_levels: int = 128,
                   near: tuple | None = None) -> SubdomainRecord:
    """Widest sampled band of levels around ``c0`` free of singular streamlines.

    Starting from the seed curve (the one closest to ``near`` when several
    components share the level), levels are marched outward, each time
    following the component nearest to the previous one.  Besides a uniform
    grid of ``n_levels`` levels, every critical value of psi is sampled, since
    singular curves can only live there.  The march stops at the first
    singular curve, at a critical level with a critical node beside the
    tracked curve, or where the level set runs out.
    """
    tr = _Tracer(psi)
    seeds = extract_level_curves(psi, c0)
    seeds = [cv for cv in seeds]
    if not seeds:
        raise NotRegularError(f"no curve at level {c0}")
    if near is not None:
        tree = cKDTree(_unwrap_for_tree(np.array([near], dtype=float)))
        seed = min(seeds, key=lambda cv: float(tree.query(_unwrap_for_tree(cv.points))[0].min()))
    else:
        seed = seeds[0]
    if seed.classification != REGULAR:
        raise NotRegularError(f"seed curve at {c0} is {seed.classification}")
    lo, hi = float(psi.values.min()), float(psi.values.max())
    crit_mask = tr.gmag <= tr.tau
    crit_vals = psi.values[crit_mask]
    X, Y = psi.grid.mesh
    crit_pts = np.stack([X[crit_mask], Y[crit_mask]], 1)
    reach = 2.0 * max(psi.grid.dx, psi.grid.dy)
    levels = np.union1d(np.linspace(lo, hi, n_levels + 1), np.unique(crit_vals))
    sampled = 0
    ends = []
    for direction in (-1, 1):
        seq = levels[levels < c0][::-1] if direction < 0 else levels[levels > c0]
        prev, end, bound = seed, (lo if direction < 0 else hi), None
        for c in seq:
            cs = tr.curves(float(c))
            prev_tree = cKDTree(_unwrap_for_tree(prev.points))
            cv = _nearest(cs, prev_tree) if cs else None
            at = crit_pts[crit_vals == c]
            # a critical node next to the tracked curve puts a singular streamline
            # on this level even where the contour itself cannot be drawn (flat slabs)
            if len(at) and float(prev_tree.query(_unwrap_for_tree(at))[0].min()) <= reach:
                sampled += 1
                end, bound = float(c), cv
                break
            if cv is None:
                end = float(c)
                break
            sampled += 1
            if cv.classification == SINGULAR:
                end, bound = float(c), cv
                break
            prev = cv
        ends.append((end, bound))
    (cm, lower), (cp, upper) = ends
    p0 = tuple(float(v) for v in seed.points[0])
    return SubdomainRecord(c0, cm, cp, lower, upper, sampled > 0, sampled, p0)


# -- recovery of the vorticity function ------------------------------------------------

@dataclass
class FRecoveryReport:
    psi_samples: np.ndarray
    omega_samples: np.ndarray
    bin_centres: np.ndarray
    bin_means: np.ndarray
    spread: np.ndarray
    max_spread: float
    counts: np.ndarray


def recover_f(psi: ScalarField, omega: ScalarField, band: SubdomainRecord,
              n_bins: int = 64, window: int = 8) -> FRecoveryReport:
    """Check that omega is a single-valued function of psi over a band.

    Every grid sample with psi strictly inside (c-, c+) is used.  Samples
    are ordered by psi and each run of ``window`` consecutive samples gets a
    least-squares line; a sample's residual is the largest one among the
    runs it belongs to.  A smooth single-valued f then leaves only
    curvature over the local psi spacing, however steep f is, while two
    interleaved branches leave O(1) residue.  Samples are binned in psi
    with equal-width bins and a bin's spread is its largest residual; bins
    holding fewer than 4 samples are ignored.
    """
    if n_bins < 16:
        raise ValueError("recover_f needs at least 16 bins")
    if psi.grid != omega.grid:
        from .errors import GridMismatchError
        raise GridMismatchError("psi and omega live on different grids")
    p = psi.values.ravel()
    w = omega.values.ravel()
    m = (p > band.c_minus) & (p < band.c_plus)
    if not np.any(m):
        raise EmptyBandError(f"no grid samples with psi in ({band.c_minus}, {band.c_plus})")
    order = np.lexsort((w[m], p[m]))
    p, w = p[m][order], w[m][order]
    resid = _local_residuals(p, w, window, tie=1e-12 * (band.c_plus - band.c_minus))
    edges = np.linspace(band.c_minus, band.c_plus, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, p, side="right") - 1, 0, n_bins - 1)
    centres = 0.5 * (edges[:-1] + edges[1:])
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=w, minlength=n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)
    spread = np.full(n_bins, -np.inf)
    np.maximum.at(spread, idx, resid)
    spread[counts < 4] = np.nan
    valid = ~np.isnan(spread)
    max_spread = float(spread[valid].max()) if np.any(valid) else 0.0
    return FRecoveryReport(p, w, centres, means, spread, max_spread, counts)


def _local_residuals(p: np.ndarray, w: np.ndarray, k: int, tie: float) -> np.ndarray:
    n = p.size
    if n < 2:
        return np.zeros(n)
    k = min(k, n)
    P = np.lib.stride_tricks.sliding_window_view(p, k)
    Wv = np.lib.stride_tricks.sliding_window_view(w, k)
    dp = P - P.mean(axis=1, keepdims=True)
    dw = Wv - Wv.mean(axis=1, keepdims=True)
    dp[np.abs(dp) < tie] = 0.0      # ties in psi must share one omega
    var = np.sum(dp * dp, axis=1)
    slope = np.divide(np.sum(dp * dw, axis=1), var, out=np.zeros_like(var), where=var > 0)
    r = np.abs(dw - slope[:, None] * dp)
    out = np.zeros(n)
    for j in range(k):
        np.maximum(out[j:j + r.shape[0]], r[:, j], out=out[j:j + r.shape[0]])
    return out


# -- shears ---------------------------------------------------------------------------

def shear_deviation(u: VectorField) -> float:
    """max(|u2|, max_y (max_x u1 - min_x u1)); zero exactly for shear flows."""
    return float(max(np.max(np.abs(u.u2)), np.max(np.ptp(u.u1, axis=0))))


def shear_detect(u: VectorField, tau_shear: float = 1e-10) -> tuple[bool, float]:
    dev = shear_deviation(u)
    return dev <= tau_shear, dev


# -- area / period identity -------------------------------------------------------------

def sublevel_area(psi: ScalarField, c: float) -> float:
    """Area of {psi <= c}, exact for psi linear between y-neighbours in each column."""
    g = psi.grid
    a = psi.values[:, :-1]
    b = psi.values[:, 1:]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(hi > lo, (c - lo) / (hi - lo), (lo <= c).astype(float))
    frac = np.clip(frac, 0.0, 1.0)
    return float(frac.sum() * g.dx * g.dy)


def area_period(psi: ScalarField, c: float, dc: float) -> tuple[float, float]:
    """(d/dc area{psi <= c} by central differences, total travel time at c)."""
    dA = (sublevel_area(psi, c + dc) - sublevel_area(psi, c - dc)) / (2 * dc)
    mu = sum(travel_time(psi, cv) for cv in extract_level_curves(psi, c))
    return dA, mu
