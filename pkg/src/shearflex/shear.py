"""Shear profiles, the cutoff that flattens them near a zero, and Hölder norms.

A cutoff shear ``v(y) * chi((y - y0)/eps)`` vanishes identically on
``|y - y0| <= eps`` and equals ``v`` for ``|y - y0| >= 2 eps``.  The
difference ``v - v_eps`` is supported in the window ``|y - y0| <= 2 eps``,
which is what makes dense windowed sampling of its norms exact at any
``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np

from .errors import ConditionVError, ConfigurationError
from .smoothstep import MAX_ORDER, step_derivatives

DerivFn = Callable[[np.ndarray, int], np.ndarray]


# -- cutoff --------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffSpec:
    """Even cutoff: 0 for |eta| <= 1, 1 for |eta| >= 2, smooth step in between."""

    sup_norms: tuple = field(init=False, repr=False)

    def __post_init__(self):
        eta = np.linspace(1.0, 2.0, 20001)
        d = cutoff_eval(self, eta, np.arange(MAX_ORDER + 1))
        object.__setattr__(self, "sup_norms", tuple(float(np.max(np.abs(r))) for r in d))


def cutoff_eval(spec: CutoffSpec | None, eta, i=0):
    """i-th derivative of the cutoff at ``eta``.

    ``i`` may be an int or an array of orders; for an array the result has
    a leading axis over the orders.
    """
    orders = np.atleast_1d(i)
    top = int(orders.max())
    if top > MAX_ORDER:
        raise ConfigurationError(f"cutoff derivatives are available up to order {MAX_ORDER}")
    eta = np.asarray(eta, dtype=float)
    d = step_derivatives(np.abs(eta) - 1.0, top)
    sign = np.where(eta < 0, -1.0, 1.0)
    out = np.stack([d[k] * sign ** k for k in orders])
    return out[0] if np.ndim(i) == 0 else out


# -- profiles --------------------------------------------------------------------

@dataclass(frozen=True)
class ShearProfile:
    """Shear v(y) with derivative access and its vanishing record (y0, n).

    ``deriv(y, k)`` returns the k-th derivative; custom profiles must
    provide it for ``k <= n + 1``.
    """

    deriv: DerivFn
    n: int
    y0: float = 0.0
    name: str = "custom"

    def __call__(self, y):
        return self.deriv(np.asarray(y, dtype=float), 0)

    def derivative(self, y, k: int) -> np.ndarray:
        return self.deriv(np.asarray(y, dtype=float), k)

    def shifted(self, c: float) -> "ShearProfile":
        """v - c (same derivatives from order 1 on)."""
        base = self.deriv

        def d(y, k):
            return base(y, k) - c if k == 0 else base(y, k)

        return ShearProfile(d, self.n, self.y0, f"{self.name}-{c:g}")

    def satisfies_condition_v(self, y0: float | None = None, tol: float = 1e-12) -> bool:
        y0 = self.y0 if y0 is None else y0
        at = np.array([y0])
        lower = [abs(float(self.derivative(at, k)[0])) for k in range(self.n)]
        top = abs(float(self.derivative(at, self.n)[0]))
        return all(v <= tol for v in lower) and top > tol


def power_law(n: int) -> ShearProfile:
    if n < 1:
        raise ConfigurationError("power-law exponent must be >= 1")

    def d(y, k):
        if k > n:
            return np.zeros_like(y)
        return factorial(n) / factorial(n - k) * y ** (n - k)

    return ShearProfile(d, n, 0.0, f"y^{n}")


def polynomial(coeffs: Sequence[float], y0: float = 0.0) -> ShearProfile:
    """Polynomial with ascending ``coeffs``; n is read off the vanishing order at y0."""
    p = np.polynomial.Polynomial(coeffs)

    def d(y, k):
        return p.deriv(k)(y) if k else p(y)

    order = 0
    while order <= p.degree() and abs(p.deriv(order)(y0) if order else p(y0)) < 1e-14:
        order += 1
    if order > p.degree():
        raise ConfigurationError("polynomial vanishes identically at y0")
    return ShearProfile(d, order, y0, "poly")


def rest() -> ShearProfile:
    """The fluid at rest, v == 0: every slab is quiescent and no window is needed."""

    def d(y, k):
        return np.zeros_like(y)

    return ShearProfile(d, 0, 0.0, "rest")


def sin_minus_identity() -> ShearProfile:
    """v(y) = sin(y) - y, vanishing to order 3 at 0."""

    def d(y, k):
        base = (np.sin(y), np.cos(y), -np.sin(y), -np.cos(y))[k % 4]
        if k == 0:
            return base - y
        if k == 1:
            return base - 1.0
        return base

    return ShearProfile(d, 3, 0.0, "sin(y)-y")


# -- cutoff shear ------------------------------------------------------------------

_CUTOFF = None


def default_cutoff() -> CutoffSpec:
    global _CUTOFF
    if _CUTOFF is None:
        _CUTOFF = CutoffSpec()
    return _CUTOFF


@dataclass(frozen=True)
class CutoffShear:
    """v_eps(y) = v(y) chi((y - y0)/eps) and derivatives by the Leibniz rule."""

    profile: ShearProfile
    eps: float
    y0: float = 0.0

    def derivative(self, y, k: int = 0) -> np.ndarray:
        return self._leibniz(np.asarray(y, dtype=float), k, complement=False)

    def __call__(self, y):
        return self.derivative(y, 0)

    def difference(self, y, k: int = 0) -> np.ndarray:
        """k-th derivative of v - v_eps = v (1 - chi)."""
        return self._leibniz(np.asarray(y, dtype=float), k, complement=True)

    def _leibniz(self, y, k, complement):
        eta = (y - self.y0) / self.eps
        chi = cutoff_eval(None, eta, np.arange(k + 1))
        if complement:
            chi = -chi
            chi[0] += 1.0
        out = np.zeros_like(y)
        for i in range(k + 1):
            out += comb(k, i) * self.profile.derivative(y, k - i) * chi[i] / self.eps ** i
        return out

    def window(self) -> tuple[float, float]:
        return (self.y0 - 2 * self.eps, self.y0 + 2 * self.eps)


def cutoff_shear(v: ShearProfile, eps: float, y0: float = 0.0) -> CutoffShear:
    if not 0.0 < eps < 0.25:
        raise ConfigurationError(f"eps must lie in (0, 1/4), got {eps}")
    if not (-1.0 < y0 - 2 * eps and y0 + 2 * eps < 1.0):
        raise ConfigurationError(f"window [{y0 - 2*eps}, {y0 + 2*eps}] leaves (-1, 1)")
    return CutoffShear(v, float(eps), float(y0))


# -- Hölder norms ---------------------------------------------------------------------

@dataclass
class NormReport:
    """C^{k,alpha} norm: sup norms of derivatives 0..k plus the Hölder seminorm of the k-th."""

    k: int
    alpha: float
    sup_norms: list
    seminorm: float

    @property
    def total(self) -> float:
        return float(sum(self.sup_norms) + self.seminorm)


def holder_seminorm(y: np.ndarray, f: np.ndarray, alpha: float, chunk: int = 512) -> float:
    """sup |f(a) - f(b)| / |a - b|^alpha over all sample pairs (exhaustive)."""
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    y = np.asarray(y, dtype=float).ravel()
    f = np.asarray(f, dtype=float).ravel()
    best = 0.0
    for s in range(0, y.size, chunk):
        dy = np.abs(y[s:s + chunk, None] - y[None, :])
        df = np.abs(f[s:s + chunk, None] - f[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dy > 0, df / np.where(dy > 0, dy, 1.0) ** alpha, 0.0)
        best = max(best, float(q.max()))
    return best


def sample_derivatives(y: np.ndarray, f: np.ndarray, k: int) -> list:
    """Derivatives 0..k of uniform samples by repeated 4th-order differencing."""
    from .grid import dy_fd

    h = float(y[1] - y[0])
    out = [np.asarray(f, dtype=float)]
    for _ in range(k):
        out.append(dy_fd(out[-1], h))
    return out


def holder_norm_1d(y, derivs, k: int, alpha: float) -> NormReport:
    """C^{k,alpha} norm from samples.

    ``derivs`` is either a sequence ``[f, f', ..., f^(k)]`` of arrays on
    ``y`` or a callable ``derivs(y, j)``.  A single array is differentiated
    numerically (``len(y) >= 4096`` recommended).
    """
    y = np.asarray(y, dtype=float)
    if callable(derivs):
        arrays = [np.asarray(derivs(y, j), dtype=float) for j in range(k + 1)]
    elif isinstance(derivs, np.ndarray) and derivs.ndim == 1:
        arrays = sample_derivatives(y, derivs, k)
    else:
        arrays = [np.asarray(a, dtype=float) for a in derivs]
        if len(arrays) < k + 1:
            raise ConfigurationError(f"need derivatives up to order {k}")
    sups = [float(np.max(np.abs(a))) for a in arrays[: k + 1]]
    return NormReport(k, float(alpha), sups, holder_seminorm(y, arrays[k], alpha))


def window_samples(cs: CutoffShear, n_samples: int = 4096) -> np.ndarray:
    """Dense samples covering the support of v - v_eps (plus one sample past each edge)."""
    lo, hi = cs.window()
    h = (hi - lo) / (n_samples - 3)
    return np.linspace(lo - h, hi + h, n_samples)


def difference_norm(cs: CutoffShear, alpha: float, k: int | None = None,
                    n_samples: int = 4096) -> NormReport:
    """C^{k,alpha} norm of v - v_eps on (-1, 1); k defaults to n - 1.

    v - v_eps vanishes outside the window, so sampling the window alone
    gives the same sup norms and the same pairwise Hölder supremum.
    """
    k = cs.profile.n - 1 if k is None else k
    y = window_samples(cs, n_samples)
    return holder_norm_1d(y, cs.difference, k, alpha)


@dataclass
class SlopeTable:
    eps: list
    sup_norms: list          # sup_norms[i][k] at eps[i]
    seminorms: list
    sup_slopes: list         # one slope per derivative order k
    seminorm_slope: float
    totals: list

    def as_rows(self):
        rows = []
        for i, e in enumerate(self.eps):
            rows.append([e] + list(self.sup_norms[i]) + [self.seminorms[i], self.totals[i]])
        return rows


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def norm_decay_sweep(v: ShearProfile, alpha: float, eps_list: Sequence[float],
                     y0: float | None = None, n_samples: int = 4096) -> SlopeTable:
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise ConfigurationError("an eps sweep needs at least 4 values for a regression")
    if any(e >= 0.25 or e <= 0 for e in eps_list):
        raise ConfigurationError("sweep values must lie in (0, 1/4)")
    ratios = np.array(eps_list[1:]) / np.array(eps_list[:-1])
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ConfigurationError("sweep must be geometric")
    y0 = v.y0 if y0 is None else y0
    reports = [difference_norm(cutoff_shear(v, e, y0), alpha, n_samples=n_samples) for e in eps_list]
    sups = [r.sup_norms for r in reports]
    semis = [r.seminorm for r in reports]
    sup_slopes = [loglog_slope(eps_list, [s[k] for s in sups]) for k in range(v.n)]
    return SlopeTable(eps_list, sups, semis, sup_slopes, loglog_slope(eps_list, semis),
                      [r.total for r in reports])


# -- Taylor remainder ---------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


def taylor_remainder(v: ShearProfile, y0: float, k: int) -> Callable[[np.ndarray], np.ndarray]:
    """h_k with v^(k)(y) = (v^(n)(y0)/(n-k)! + h_k(y)) (y - y0)^(n-k).

    Evaluated through the integral form of Taylor's remainder,
    h_k(y) = 1/(n-k-1)! * int_0^1 (1-s)^(n-k-1) [v^(n)(y0 + s(y-y0)) - v^(n)(y0)] ds,
    which is free of the 0/0 at y0 (where h_k = 0).
    """
    n = v.n
    if not v.satisfies_condition_v(y0):
        raise ConditionVError(f"profile {v.name} does not vanish to order {n} at y0={y0}")
    if not 0 <= k <= n - 1:
        raise ConfigurationError(f"k must lie in [0, {n - 1}]")
    s = 0.5 * (_GL_NODES + 1.0)
    w = 0.5 * _GL_WEIGHTS * (1.0 - s) ** (n - k - 1) / factorial(n - k - 1)
    top = float(v.derivative(np.array([y0]), n)[0])

    def h(y):
        y = np.asarray(y, dtype=float)
        pts = y0 + s[:, None] * (y.ravel()[None, :] - y0)
        vals = v.derivative(pts, n) - top
        return (w @ vals).reshape(y.shape)

    return h
