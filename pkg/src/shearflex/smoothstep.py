"""C-infinity smooth step and its derivatives through truncated Taylor jets.

``step(t) = s(t) / (s(t) + s(1 - t))`` with ``s(t) = exp(-1/t)`` for t > 0.
It is 0 for t <= 0, 1 for t >= 1 and flat to all orders at both ends.
Derivatives are propagated with jet arithmetic (coefficient arrays of a
truncated power series) so no symbolic expansion is needed.
"""

from __future__ import annotations

from math import factorial

import numpy as np

MAX_ORDER = 8
# below this distance from an endpoint every derivative is < exp(-400) * poly
_FLAT = 2.5e-3


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = a.shape[0]
    out = np.zeros_like(a)
    for k in range(K):
        out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return out


def _jet_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = a.shape[0]
    out = np.zeros_like(a)
    for k in range(K):
        acc = a[k].copy()
        for j in range(1, k + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


def _jet_exp(a: np.ndarray) -> np.ndarray:
    K = a.shape[0]
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for k in range(1, K):
        acc = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc += j * a[j] * out[k - j]
        out[k] = acc / k
    return out


def _s_jet(t: np.ndarray, K: int, sign: float) -> np.ndarray:
    """Jet of exp(-1/(sign*t + c)) in the variable t; t here is already shifted."""
    one = np.zeros((K, t.size))
    one[0] = 1.0
    arg = np.zeros((K, t.size))
    arg[0] = t
    if K > 1:
        arg[1] = sign
    return _jet_exp(-_jet_div(one, arg))


def step_derivatives(t, order: int = 0) -> np.ndarray:
    """Derivatives 0..order of the smooth step at ``t``; shape ``(order+1,) + t.shape``."""
    if order > MAX_ORDER:
        raise ValueError(f"derivative order {order} exceeds {MAX_ORDER}")
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    K = order + 1
    out = np.zeros((K, flat.size))
    out[0][flat >= 1.0 - _FLAT] = 1.0
    mid = (flat > _FLAT) & (flat < 1.0 - _FLAT)
    if np.any(mid):
        tm = flat[mid]
        a = _s_jet(tm, K, 1.0)
        b = _s_jet(1.0 - tm, K, -1.0)
        jet = _jet_div(a, a + b)
        for k in range(K):
            out[k][mid] = jet[k] * factorial(k)
    return out.reshape((K,) + t.shape)


def step(t) -> np.ndarray:
    return step_derivatives(t, 0)[0]
