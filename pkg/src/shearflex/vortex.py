"""Compactly supported radial vortices embedded in quiescent shear windows.

A vortex of scale ``eps``, amplitude ``A`` and order ``n`` has velocity
``A eps^n U(|p - c|/eps) (-(y - yc), x - xc)``, stream function
``A eps^(n+2) (G(rho) - G(3/4))`` with ``G(r) = int_0^r s U(s) ds`` and
vorticity ``A eps^n (2 U + rho U')``.  Where ``U == 1`` the vortex is a
solid-body rotation with angular speed ``A eps^n``; children placed there
orbit rigidly, which is what produces quasiperiodic motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import (ConfigurationError, PlateauViolation, QuiescenceViolation,
                     WindowOverlap)
from .grid import Grid, ScalarField, VectorField, dy_fd
from .shear import ShearProfile, cutoff_eval, cutoff_shear, holder_seminorm
from .smoothstep import step_derivatives

SUPPORT = 0.75
TOL_QUIET = 1e-14
TWO_PI = 2.0 * np.pi


# -- radial profiles ------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """Radial profile U(rho), supported in [0, 3/4] and even in rho.

    ``kind="step"``: U = 1 - step((rho - a)/(3/4 - a)), equal to 1 on
    [0, a].  With a = 2/3 (the ``plateau`` profile) U == 1 on [1/3, 2/3]
    and the vortex core is a solid-body rotation.
    ``kind="poly"``: U = (1 - (rho / (3/4))^2)^m, a C^(m-1) bump that is
    far easier to resolve on a grid.
    """

    name: str
    kind: str = "step"
    param: float = 2.0 / 3.0

    def __post_init__(self):
        if self.kind == "step" and not 0.0 <= self.param < SUPPORT:
            raise ConfigurationError("ramp must start inside [0, 3/4)")
        if self.kind == "poly" and (self.param < 2 or self.param != int(self.param)):
            raise ConfigurationError("bump power must be an integer >= 2")
        if self.kind not in ("step", "poly"):
            raise ConfigurationError(f"unknown profile kind {self.kind!r}")

    @property
    def plateau(self) -> bool:
        return self.kind == "step" and self.param >= 2.0 / 3.0

    @property
    def _poly_t(self):
        # U as a polynomial in t = rho^2
        return np.polynomial.Polynomial([1.0, -1.0 / SUPPORT ** 2]) ** int(self.param)

    def derivatives(self, rho, order: int = 0) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.kind == "poly":
            p = _poly_in_rho(int(self.param))
            inside = rho < SUPPORT
            out = np.stack([np.where(inside, p.deriv(k)(rho) if k else p(rho), 0.0)
                            for k in range(order + 1)])
            return out
        w = SUPPORT - self.param
        d = step_derivatives((rho - self.param) / w, order)
        out = -d / w ** np.arange(order + 1).reshape((-1,) + (1,) * rho.ndim)
        out[0] += 1.0
        return out

    def __call__(self, rho) -> np.ndarray:
        return self.derivatives(rho, 0)[0]

    def G(self, rho) -> np.ndarray:
        """G(r) = int_0^r s U(s) ds via composite Gauss-Legendre panels."""
        rho = np.minimum(np.asarray(rho, dtype=float), SUPPORT)
        edges, cum = _panel_table(self.kind, self.param)
        idx = np.clip(np.searchsorted(edges, rho, side="right") - 1, 0, len(edges) - 2)
        a = edges[idx]
        x, w = _GL16
        pts = a[..., None] + (rho - a)[..., None] * 0.5 * (x + 1.0)
        partial = 0.5 * (rho - a) * np.sum(w * pts * self(pts), axis=-1)
        return cum[idx] + partial

    def radial_operator_norms(self, kmax: int) -> list:
        """sup |(r^-1 d/dr)^k U| for k = 0..kmax."""
        return list(_radial_op_norms(self.kind, self.param, kmax))


_GL16 = np.polynomial.legendre.leggauss(16)


@lru_cache(maxsize=None)
def _poly_in_rho(m: int) -> np.polynomial.Polynomial:
    return np.polynomial.Polynomial([1.0, 0.0, -1.0 / SUPPORT ** 2]) ** m


@lru_cache(maxsize=None)
def _panel_table(kind: str, param: float):
    edges = np.linspace(0.0, SUPPORT, 769)
    prof = RadialProfile("tmp", kind, param)
    x, w = _GL16
    a, b = edges[:-1], edges[1:]
    pts = a[:, None] + (b - a)[:, None] * 0.5 * (x + 1.0)
    vals = 0.5 * (b - a) * np.sum(w * pts * prof(pts), axis=1)
    return edges, np.concatenate([[0.0], np.cumsum(vals)])


@lru_cache(maxsize=None)
def _radial_op_norms(kind: str, param: float, kmax: int):
    prof = RadialProfile("tmp", kind, param)
    if kind == "poly":
        # r^-1 d/dr = 2 d/dt with t = r^2
        pt = prof._poly_t
        t = np.linspace(0.0, SUPPORT ** 2, 20001)
        return tuple(float(np.max(np.abs(2.0 ** k * pt.deriv(k)(t)))) if k else float(np.max(np.abs(pt(t))))
                     for k in range(kmax + 1))
    # (r^-1 d/dr)^k U = sum_{j,m} c_{j,m} r^-m U^(j); U is constant near 0
    r = np.linspace(max(param, 1e-3), SUPPORT, 20001)
    D = prof.derivatives(r, kmax)
    terms = {(0, 0): 1.0}
    norms = []
    for k in range(kmax + 1):
        val = sum(c * r ** (-m) * D[j] for (j, m), c in terms.items())
        norms.append(float(np.max(np.abs(val))))
        nxt = {}
        for (j, m), c in terms.items():
            if m:
                nxt[(j, m + 2)] = nxt.get((j, m + 2), 0.0) - m * c
            nxt[(j + 1, m + 1)] = nxt.get((j + 1, m + 1), 0.0) + c
        terms = nxt
    return tuple(norms)


PLATEAU = RadialProfile("plateau", "step", 2.0 / 3.0)
BUMP = RadialProfile("bump", "poly", 8)
PROFILES = {"plateau": PLATEAU, "bump": BUMP}


def stream_G(U: RadialProfile, r: float) -> float:
    """G(r) = int_0^r s U(s) ds by adaptive quadrature (abs tol 1e-12)."""
    if r < 0:
        raise ConfigurationError("r must be >= 0")
    top = min(r, SUPPORT)
    pts = [p for p in ((U.param,) if U.kind == "step" else ()) if 0.0 < p < top]
    val, _ = integrate.quad(lambda s: s * float(U(s)), 0.0, top, epsabs=1e-12, epsrel=1e-13,
                            points=pts or None, limit=200)
    return float(val)


# -- vortex specs -----------------------------------------------------------------

@dataclass(frozen=True)
class VortexSpec:
    """Radial vortex; ``children`` carry absolute t = 0 centres inside the plateau annulus."""

    center: tuple
    eps: float
    amplitude: float = 1.0
    n: int = 2
    profile: RadialProfile = PLATEAU
    children: tuple = ()

    def __post_init__(self):
        if self.eps <= 0 or self.amplitude <= 0:
            raise ConfigurationError("vortex eps and amplitude must be positive")
        object.__setattr__(self, "center", (float(self.center[0]) % TWO_PI, float(self.center[1])))
        object.__setattr__(self, "children", tuple(self.children))
        for ch in self.children:
            check_plateau(self, ch)

    @property
    def radius(self) -> float:
        return SUPPORT * self.eps

    @property
    def omega(self) -> float:
        """Angular speed of the solid-body plateau, A eps^n."""
        return self.amplitude * self.eps ** self.n

    def moved(self, dx: float = 0.0, dy: float = 0.0) -> "VortexSpec":
        return VortexSpec((self.center[0] + dx, self.center[1] + dy), self.eps, self.amplitude,
                          self.n, self.profile, tuple(c.moved(dx, dy) for c in self.children))


def place_child(parent: VortexSpec, radius: float, angle: float, eps: float,
                amplitude: float = 1.0, n: int | None = None,
                profile: RadialProfile = BUMP, children=()) -> VortexSpec:
    """Child centred at polar (radius, angle) of the parent frame at t = 0."""
    cx = parent.center[0] + radius * math.cos(angle)
    cy = parent.center[1] + radius * math.sin(angle)
    return VortexSpec((cx, cy), eps, amplitude, parent.n if n is None else n, profile, children)


def periodic_dx(x, xc) -> np.ndarray:
    return np.mod(np.asarray(x) - xc + np.pi, TWO_PI) - np.pi


def check_plateau(parent: VortexSpec, child: VortexSpec) -> None:
    if not parent.profile.plateau:
        raise PlateauViolation(f"parent profile {parent.profile.name!r} has no solid-body plateau")
    d = math.hypot(float(periodic_dx(child.center[0], parent.center[0])),
                   child.center[1] - parent.center[1])
    inner, outer = parent.eps / 3.0, 2.0 * parent.eps / 3.0
    if not (d - child.radius > inner and d + child.radius < outer):
        raise PlateauViolation(
            f"child support [{d - child.radius:.4g}, {d + child.radius:.4g}] leaves the plateau "
            f"annulus ({inner:.4g}, {outer:.4g})")


def _radial_parts(spec: VortexSpec, px, py, order: int):
    X = periodic_dx(px, spec.center[0])
    Y = np.asarray(py, dtype=float) - spec.center[1]
    rho = np.hypot(X, Y) / spec.eps
    D = np.zeros((order + 1,) + rho.shape)
    inside = rho < SUPPORT
    if np.any(inside):
        D[:, inside] = spec.profile.derivatives(rho[inside], order)
    return X, Y, rho, D


def vortex_velocity(spec: VortexSpec, px, py) -> tuple:
    """Velocity of a single vortex (children excluded)."""
    X, Y, _, D = _radial_parts(spec, px, py, 0)
    s = spec.amplitude * spec.eps ** spec.n * D[0]
    return -s * Y, s * X


def vortex_vorticity(spec: VortexSpec, px, py) -> np.ndarray:
    _, _, rho, D = _radial_parts(spec, px, py, 1)
    return spec.amplitude * spec.eps ** spec.n * (2.0 * D[0] + rho * D[1])


def vortex_stream(spec: VortexSpec, px, py) -> np.ndarray:
    """Stream function, normalised to vanish outside the support."""
    X = periodic_dx(px, spec.center[0])
    Y = np.asarray(py, dtype=float) - spec.center[1]
    rho = np.hypot(X, Y) / spec.eps
    out = np.zeros(rho.shape)
    inside = rho < SUPPORT
    if np.any(inside):
        g_top = spec.profile.G(np.array(SUPPORT))
        out[inside] = spec.profile.G(rho[inside]) - g_top
    return spec.amplitude * spec.eps ** (spec.n + 2) * out


def _tree(spec: VortexSpec):
    yield spec
    for ch in spec.children:
        yield from _tree(ch)


# -- nested / quasiperiodic evaluation -----------------------------------------------

def _rotate(ax, ay, theta):
    c, s = math.cos(theta), math.sin(theta)
    return c * ax - s * ay, s * ax + c * ay


def nested_quasiperiodic_eval(spec: VortexSpec, t: float, px, py) -> tuple:
    """Velocity of a vortex tree at time t.

    Each child is evaluated in its parent's frame, which rotates rigidly
    with the parent's plateau speed about the parent centre; the velocity
    is rotated back.  The parent's own solid-body field supplies the frame
    drift.  At t = 0 this is the static superposition.
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    u1, u2 = vortex_velocity(spec, px, py)
    if not spec.children:
        return u1, u2
    theta = spec.omega * t
    X = periodic_dx(px, spec.center[0])
    Y = py - spec.center[1]
    qx, qy = _rotate(X, Y, -theta)
    qx = qx + spec.center[0]
    qy = qy + spec.center[1]
    for ch in spec.children:
        check_plateau(spec, ch)
        c1, c2 = nested_quasiperiodic_eval(ch, t, qx, qy)
        r1, r2 = _rotate(c1, c2, theta)
        u1 = u1 + r1
        u2 = u2 + r2
    return u1, u2


def child_center(parent: VortexSpec, child: VortexSpec, t: float) -> tuple:
    """Lab-frame position at time t of a depth-1 child centre."""
    X = float(periodic_dx(child.center[0], parent.center[0]))
    Y = child.center[1] - parent.center[1]
    rx, ry = _rotate(X, Y, parent.omega * t)
    return ((parent.center[0] + rx) % TWO_PI, parent.center[1] + ry)


def frequency_list(spec: VortexSpec, max_den: int = 10 ** 6, tol: float = 1e-12):
    """Plateau angular speeds of every node and pairwise commensurability flags.

    A pair is commensurate when the best rational approximation p/q of the
    ratio with q <= ``max_den`` matches it within ``tol``.
    """
    freqs = [node.omega for node in _tree(spec)]
    flags = {}
    for i in range(len(freqs)):
        for j in range(i + 1, len(freqs)):
            ratio = freqs[j] / freqs[i]
            approx = Fraction(ratio).limit_denominator(max_den)
            flags[(i, j)] = abs(ratio - float(approx)) <= tol
    return freqs, flags


def is_commensurate(a: float, b: float, max_den: int = 10 ** 6, tol: float = 1e-12) -> bool:
    ratio = b / a
    return abs(ratio - float(Fraction(ratio).limit_denominator(max_den))) <= tol


# -- flows ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Cutoff window centred at y0; traveling windows flatten v - v(y0) instead of v."""

    y0: float
    eps: float
    traveling: bool = False


@dataclass(frozen=True)
class FlowSpec:
    shear: ShearProfile
    windows: tuple = ()
    vortices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        object.__setattr__(self, "vortices", tuple(self.vortices))

    def wave_speed(self, w: Window) -> float:
        return float(self.shear(np.array([w.y0]))[0]) if w.traveling else 0.0

    def window_of(self, vortex: VortexSpec):
        for w in self.windows:
            if abs(vortex.center[1] - w.y0) <= w.eps:
                return w
        return None

    def ambient(self, y, comoving: Window | None = None) -> np.ndarray:
        """Horizontal background velocity at t = 0 (optionally minus a window's speed)."""
        y = np.asarray(y, dtype=float)
        u = self.shear(y)
        for w in self.windows:
            s = self.wave_speed(w)
            lo, hi = w.y0 - 2 * w.eps, w.y0 + 2 * w.eps
            m = (y > lo) & (y < hi)
            if np.any(m):
                chi = cutoff_eval(None, (y[m] - w.y0) / w.eps, 0)
                u[m] = s + (u[m] - s) * chi
        if comoving is not None:
            u = u - self.wave_speed(comoving)
        return u

    def ambient_derivative(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        d = self.shear.derivative(y, 1)
        for w in self.windows:
            s = self.wave_speed(w)
            lo, hi = w.y0 - 2 * w.eps, w.y0 + 2 * w.eps
            m = (y > lo) & (y < hi)
            if np.any(m):
                chi = cutoff_eval(None, (y[m] - w.y0) / w.eps, np.arange(2))
                d[m] = chi[1] / w.eps * (self.shear(y[m]) - s) + chi[0] * d[m]
        return d


def validate_flow(flow: FlowSpec) -> None:
    ws = sorted(flow.windows, key=lambda w: w.y0)
    for w in ws:
        cutoff_shear(flow.shear, w.eps, w.y0)
    for a, b in zip(ws, ws[1:]):
        if a.y0 + 2 * a.eps > b.y0 - 2 * b.eps:
            raise WindowOverlap(f"windows at y0={a.y0} and y0={b.y0} intersect")
    vs = list(flow.vortices)
    for v in vs:
        if abs(v.center[1]) + v.radius >= 1.0:
            raise QuiescenceViolation(f"vortex at {v.center} reaches a wall")
        w = flow.window_of(v)
        ys = np.linspace(v.center[1] - v.radius, v.center[1] + v.radius, 2001)
        amb = np.max(np.abs(flow.ambient(ys, comoving=w)))
        if amb > TOL_QUIET:
            raise QuiescenceViolation(
                f"vortex at {v.center} sits where the ambient shear reaches {amb:.3g}")
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            d = math.hypot(float(periodic_dx(vs[i].center[0], vs[j].center[0])),
                           vs[i].center[1] - vs[j].center[1])
            if d < vs[i].radius + vs[j].radius:
                raise QuiescenceViolation("vortex supports intersect")


def evaluate_flow(flow: FlowSpec, t: float, px, py) -> tuple:
    """Lab-frame velocity at time t: ambient shear plus every vortex tree.

    A vortex in a traveling window is carried with the window's speed
    v(y0); at t = 0 this is the static composition.
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    u1 = flow.ambient(py.ravel()).reshape(py.shape) + np.zeros(np.broadcast(px, py).shape)
    u2 = np.zeros_like(u1)
    for v in flow.vortices:
        w = flow.window_of(v)
        s = flow.wave_speed(w) if w is not None else 0.0
        a, b = nested_quasiperiodic_eval(v.moved(s * t), t, px, py)
        u1 = u1 + a
        u2 = u2 + b
    return u1, u2


def traveling_wave_eval(flow: FlowSpec, t: float, px, py) -> tuple:
    return evaluate_flow(flow, t, px, py)


_GL8 = np.polynomial.legendre.leggauss(8)


def shear_stream(flow: FlowSpec, y: np.ndarray) -> np.ndarray:
    """psi_shear(y) = -int_{-1}^y u1(s) ds on sorted nodes ``y`` starting at -1."""
    x, w = _GL8
    a, b = y[:-1], y[1:]
    pts = a[:, None] + (b - a)[:, None] * 0.5 * (x + 1.0)
    vals = flow.ambient(pts.ravel()).reshape(pts.shape)
    seg = 0.5 * (b - a) * (vals @ w)
    return -np.concatenate([[0.0], np.cumsum(seg)])


def compose_flexible(flow: FlowSpec, grid: Grid):
    """Sample velocity, vorticity and stream function of the t = 0 composite."""
    validate_flow(flow)
    X, Y = grid.mesh
    y = grid.y
    u1 = np.broadcast_to(flow.ambient(y), grid.shape).copy()
    u2 = np.zeros(grid.shape)
    omega = np.broadcast_to(-flow.ambient_derivative(y), grid.shape).copy()
    psi = np.broadcast_to(shear_stream(flow, y), grid.shape).copy()
    for root in flow.vortices:
        for v in _tree(root):
            a, b = vortex_velocity(v, X, Y)
            u1 += a
            u2 += b
            omega += vortex_vorticity(v, X, Y)
            psi += vortex_stream(v, X, Y)
    return VectorField(grid, u1, u2), ScalarField(grid, omega), ScalarField(grid, psi)


def shear_only(flow: FlowSpec) -> FlowSpec:
    return FlowSpec(flow.shear, flow.windows, ())


def poiseuille_composite(eps: float, amplitude: float = 1.0, n: int = 2,
                         profile: RadialProfile = PLATEAU, vortex_eps: float | None = None,
                         children=()) -> FlowSpec:
    """(y^n, 0) flattened on |y| <= eps with one vortex at (pi, 0)."""
    from .shear import power_law

    v = VortexSpec((np.pi, 0.0), eps if vortex_eps is None else vortex_eps, amplitude, n,
                   profile, children)
    return FlowSpec(power_law(n), (Window(0.0, eps),), (v,))


# -- norms of the vortex part ----------------------------------------------------------

def _box_derivatives(profile: RadialProfile, order: int, half: float = 0.8, m: int = 801):
    """All partial derivatives up to ``order`` of W(q) = U(|q|)(-q_y, q_x) on a dense box."""
    s = np.linspace(-half, half, m)
    h = s[1] - s[0]
    QX, QY = np.meshgrid(s, s, indexing="ij")
    spec = VortexSpec((0.0, 0.0), 1.0, 1.0, 0, profile)
    w1, w2 = vortex_velocity(spec, QX, QY)
    levels = [[w1, w2]]
    for _ in range(order):
        nxt = []
        for f in levels[-1]:
            nxt.append(dy_fd(f.T, h).T)
            nxt.append(dy_fd(f, h))
        levels.append(nxt)
    return s, levels


@lru_cache(maxsize=None)
def unit_vortex_norms(profile_name: str, m: int, alpha: float, stride: int = 8):
    """Scale-free sup norms of derivatives 0..m and C^alpha seminorm of order-m derivatives of W."""
    profile = PROFILES[profile_name]
    s, levels = _box_derivatives(profile, m)
    sups = tuple(max(float(np.max(np.abs(f))) for f in lv) for lv in levels)
    sub = s[::stride]
    P = np.stack(np.meshgrid(sub, sub, indexing="ij"), axis=-1).reshape(-1, 2)
    semi = 0.0
    for f in levels[m]:
        semi = max(semi, holder_seminorm_2d(P, f[::stride, ::stride].ravel(), alpha))
    return sups, semi


def holder_seminorm_2d(points: np.ndarray, f: np.ndarray, alpha: float, chunk: int = 256) -> float:
    """Exhaustive pairwise Hölder quotient over scattered 2D samples.

    Pairs farther apart than ``(osc / best)^(1/alpha)`` cannot beat the
    running maximum and are skipped, so the result is still exact over
    the sample set.
    """
    order = np.argsort(points[:, 0], kind="stable")
    points, f = points[order], f[order]
    osc = float(f.max() - f.min())
    if osc == 0.0:
        return 0.0
    # seed with nearest-neighbour quotients along the sorted order
    d0 = np.sqrt(((points[1:] - points[:-1]) ** 2).sum(-1))
    ok = d0 > 0
    best = float(np.max(np.abs(f[1:] - f[:-1])[ok] / d0[ok] ** alpha)) if np.any(ok) else 0.0
    xs = points[:, 0]
    for s in range(0, len(points), chunk):
        blk = points[s:s + chunk]
        reach = (osc / best) ** (1.0 / alpha) if best > 0 else np.inf
        lo = np.searchsorted(xs, blk[:, 0].min() - reach, side="left")
        hi = np.searchsorted(xs, blk[:, 0].max() + reach, side="right")
        d = np.sqrt(((blk[:, None, :] - points[None, lo:hi, :]) ** 2).sum(-1))
        df = np.abs(f[s:s + chunk, None] - f[None, lo:hi])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(d > 0, df / np.where(d > 0, d, 1.0) ** alpha, 0.0)
        best = max(best, float(q.max()))
    return best


def vortex_norm(spec: VortexSpec, m: int, alpha: float) -> tuple:
    """(sup norms list, seminorm) of a single vortex in C^{m,alpha}, by exact scaling."""
    sups, semi = unit_vortex_norms(spec.profile.name, m, float(alpha))
    A, e, n = spec.amplitude, spec.eps, spec.n
    scaled = [A * e ** (n + 1 - k) * sups[k] for k in range(m + 1)]
    return scaled, A * e ** (n + 1 - m - alpha) * semi


def closeness(flow: FlowSpec, alpha: float, window_index: int = 0) -> dict:
    """C^{n-1,alpha} distance of the composite to the uncut shear.

    Sum of the shear part (windowed 1D norm of v - v_eps) and the vortex
    part (each vortex tree node); the two have disjoint supports.
    """
    from .shear import difference_norm

    m = flow.shear.n - 1
    w = flow.windows[window_index]
    shear_rep = difference_norm(cutoff_shear(flow.shear, w.eps, w.y0), alpha, m)
    vort = 0.0
    for root in flow.vortices:
        for v in _tree(root):
            sups, semi = vortex_norm(v, m, alpha)
            vort += sum(sups) + semi
    return {"shear": shear_rep.total, "vortex": vort, "total": shear_rep.total + vort}


def c2_distance(u: VectorField, target: Sequence[np.ndarray]) -> dict:
    """sum_{k<=2} max over components and partials of sup |d^k (u - target)| on the grid."""
    from .grid import dx_spectral

    g = u.grid
    d = [u.u1 - target[0], u.u2 - target[1]]
    parts = [max(float(np.max(np.abs(c))) for c in d)]
    firsts = []
    for c in d:
        firsts += [dx_spectral(c), dy_fd(c, g.dy)]
    parts.append(max(float(np.max(np.abs(c))) for c in firsts))
    seconds = []
    for c in d:
        cx = dx_spectral(c)
        cy = dy_fd(c, g.dy)
        seconds += [dx_spectral(cx), dy_fd(cx, g.dy), dy_fd(cy, g.dy)]
    parts.append(max(float(np.max(np.abs(c))) for c in seconds))
    return {"orders": parts, "total": float(sum(parts))}
