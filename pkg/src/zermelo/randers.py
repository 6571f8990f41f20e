"""Zermelo-Randers metric and its geodesic spray for arbitrary weak winds.

The background metric is Euclidean, so upper and lower indices coincide and
covariant derivatives of the wind reduce to ordinary partials.  All functions
accept single vectors of shape ``(2,)`` or batches ``(2, ...)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import StencilOutsideDomain, StrongWind, ZeroVector
from .wind import WindField


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def _randers_norm(w, y):
    # unchecked evaluation; callers validate
    rho = 1.0 - _dot(w, w)
    yw = _dot(y, w)
    return (np.sqrt(yw * yw + rho * _dot(y, y)) - yw) / rho


def metric_value(w, y):
    """Travel time per unit parameter along ``y`` against drift ``w``.

    ``F(y) = (sqrt(<y,w>^2 + (1-|w|^2)|y|^2) - <y,w>) / (1-|w|^2)``.
    """
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(_dot(w, w) >= 1.0):
        raise StrongWind("metric requires |w| < 1")
    if np.any(_dot(y, y) == 0.0):
        raise ZeroVector("metric is undefined at y = 0")
    return _randers_norm(w, y)


@dataclass(frozen=True)
class RandersData:
    """Riemannian part ``a``, one-form ``b`` and ``rho = 1 - |w|^2`` at a point."""

    rho: float
    a: np.ndarray
    b: np.ndarray

    def alpha(self, y):
        y = np.asarray(y, dtype=float)
        return np.sqrt(np.einsum("i...,ij,j...->...", y, self.a, y))

    def beta(self, y):
        return np.tensordot(self.b, np.asarray(y, dtype=float), axes=1)

    def __call__(self, y):
        return self.alpha(y) + self.beta(y)

    def b_norm_sq(self) -> float:
        return float(self.b @ np.linalg.solve(self.a, self.b))


def randers_data(w) -> RandersData:
    w = np.asarray(w, dtype=float).reshape(2)
    rho = 1.0 - float(w @ w)
    if rho <= 0.0:
        raise StrongWind("Randers data requires |w| < 1")
    a = (rho * np.eye(2) + np.outer(w, w)) / rho ** 2
    return RandersData(rho, a, -w / rho)


@dataclass(frozen=True)
class NavigationTensors:
    """``L = dw + dw^T``, ``C = dw - dw^T``, ``S_i = w^s L_si``, ``T_i = w^s C_si``."""

    L: np.ndarray
    C: np.ndarray
    S: np.ndarray
    T: np.ndarray


def navigation_tensors(w, J) -> NavigationTensors:
    w = np.asarray(w, dtype=float)
    J = np.asarray(J, dtype=float)
    Jt = np.swapaxes(J, 0, 1)
    L = J + Jt
    C = J - Jt
    S = np.einsum("s...,si...->i...", w, L)
    T = np.einsum("s...,si...->i...", w, C)
    return NavigationTensors(L, C, S, T)


class Contractions(NamedTuple):
    S0: np.ndarray
    L00: np.ndarray
    Lww: np.ndarray
    C0: np.ndarray


def contract(tensors: NavigationTensors, w, y) -> Contractions:
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    L = tensors.L
    return Contractions(
        S0=_dot(tensors.S, y),
        L00=np.einsum("i...,ij...,j...->...", y, L, y),
        Lww=np.einsum("i...,ij...,j...->...", w, L, w),
        C0=np.einsum("ij...,j...->i...", tensors.C, y),
    )


def zeta_from_parts(w, J, y):
    """Spray coefficients from the wind value and Jacobian at one or many points."""
    F = _randers_norm(w, y)
    tens = navigation_tensors(w, J)
    k = contract(tens, w, y)
    bracket = 2.0 * F * k.S0 - k.L00 - F * F * k.Lww
    return (0.25 * (y / F - w) * bracket
            - 0.25 * F * F * (tens.S + tens.T)
            - 0.5 * F * k.C0)


def zeta_spray(field: WindField, x, y, check: bool = True) -> np.ndarray:
    """Geodesic spray coefficients ``G = zeta`` (the Euclidean part vanishes)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = field.value(x, check=check)
    if check:
        if np.any(_dot(w, w) >= 1.0):
            raise StrongWind("spray requires |w(x)| < 1")
        if np.any(_dot(y, y) == 0.0):
            raise ZeroVector("spray is undefined at y = 0")
    return zeta_from_parts(w, field.jacobian(x, check=check), y)


HESSIAN_STEP = 1e-3


def hessian_spray(field: WindField, x, y, step: float = HESSIAN_STEP) -> np.ndarray:
    """Spray coefficients straight from the definition
    ``G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})``.

    Every derivative of ``F^2`` is a central difference, combined with one
    Richardson extrapolation (steps ``h`` and ``2h``), so this shares nothing
    with ``zeta_spray`` except the metric itself.  Single point only.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    y = np.asarray(y, dtype=float).reshape(2)
    hx = step * max(1.0, float(np.hypot(*x)))
    hy = step * max(1.0, float(np.hypot(*y)))
    if not field.domain.contains(x, pad=-2 * hx):
        raise StencilOutsideDomain(f"stencil of half-width {2 * hx:g} around {x} leaves the domain")

    def F2(xx, yy):
        return metric_value(field.value(xx), yy) ** 2

    eye = np.eye(2)

    def parts(hx, hy):
        g = np.empty((2, 2))
        mixed = np.empty((2, 2))   # d^2 F^2 / dx^k dy^l
        grad_x = np.empty(2)
        f0 = F2(x, y)
        for i in range(2):
            ei, hi = eye[i] * hx, eye[i] * hy
            g[i, i] = 0.5 * (F2(x, y + hi) - 2 * f0 + F2(x, y - hi)) / hy ** 2
            grad_x[i] = (F2(x + ei, y) - F2(x - ei, y)) / (2 * hx)
            for l in range(2):
                el = eye[l] * hy
                mixed[i, l] = (F2(x + ei, y + el) - F2(x + ei, y - el)
                               - F2(x - ei, y + el) + F2(x - ei, y - el)) / (4 * hx * hy)
        e0, e1 = eye[0] * hy, eye[1] * hy
        g[0, 1] = g[1, 0] = 0.5 * (F2(x, y + e0 + e1) - F2(x, y + e0 - e1)
                                   - F2(x, y - e0 + e1) + F2(x, y - e0 - e1)) / (4 * hy * hy)
        return g, mixed.T @ y - grad_x

    g1, v1 = parts(hx, hy)
    g2, v2 = parts(2 * hx, 2 * hy)
    g = (4 * g1 - g2) / 3
    v = (4 * v1 - v2) / 3
    return 0.25 * np.linalg.solve(g, v)
