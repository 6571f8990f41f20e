"""Drift fields on planar rectangles.

Points are arrays whose leading axis holds the two coordinates, so a single
point has shape ``(2,)`` and a batch of points has shape ``(2, n)`` (or any
``(2, ...)``).  Field values share that layout; Jacobians have shape
``(2, 2, ...)`` with ``J[i, j] = d w^i / d x_j``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import FieldNotWeak, ParseError, PointOutsideDomain

DEFAULT_MARGIN = 0.99


@dataclass(frozen=True)
class Domain:
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float

    def __post_init__(self):
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise ValueError(f"degenerate rectangle {self.bounds}")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x1_min, self.x1_max, self.x2_min, self.x2_max)

    def corners(self) -> np.ndarray:
        """The four vertices as a ``(2, 4)`` array."""
        return np.array([[self.x1_min, self.x1_max, self.x1_min, self.x1_max],
                         [self.x2_min, self.x2_min, self.x2_max, self.x2_max]])

    def contains(self, x, pad: float = 0.0):
        x = np.asarray(x, dtype=float)
        return ((x[0] >= self.x1_min - pad) & (x[0] <= self.x1_max + pad)
                & (x[1] >= self.x2_min - pad) & (x[1] <= self.x2_max + pad))

    def contains_rect(self, other: "Domain") -> bool:
        return (self.x1_min <= other.x1_min and other.x1_max <= self.x1_max
                and self.x2_min <= other.x2_min and other.x2_max <= self.x2_max)

    def outside_distance(self, x):
        """Positive outside the rectangle, non-positive inside (L-infinity sense)."""
        x = np.asarray(x, dtype=float)
        return np.maximum.reduce([self.x1_min - x[0], x[0] - self.x1_max,
                                  self.x2_min - x[1], x[1] - self.x2_max])

    def grid(self, n: int) -> np.ndarray:
        """Uniform ``n x n`` sample of the rectangle, shape ``(2, n*n)``."""
        g1, g2 = np.meshgrid(np.linspace(self.x1_min, self.x1_max, n),
                             np.linspace(self.x2_min, self.x2_max, n))
        return np.stack([g1.ravel(), g2.ravel()])


@dataclass(frozen=True)
class WeakReport:
    max_norm: float
    location: tuple[float, float]
    margin: float

    @property
    def passed(self) -> bool:
        return self.max_norm <= self.margin


class WindField:
    """Base class; subclasses provide ``_value`` and ``_jacobian``."""

    domain: Domain
    margin: float = DEFAULT_MARGIN

    def _check(self, x):
        inside = self.domain.contains(x)
        if not np.all(inside):
            x = np.asarray(x, dtype=float)
            bad = x.reshape(2, -1)[:, ~np.ravel(inside)][:, 0]
            raise PointOutsideDomain(bad, self.domain)

    def value(self, x, check: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if check:
            self._check(x)
        return self._value(x)

    def jacobian(self, x, check: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if check:
            self._check(x)
        return self._jacobian(x)

    def _value(self, x):
        raise NotImplementedError

    def _jacobian(self, x):
        raise NotImplementedError

    def candidate_maxima(self) -> np.ndarray:
        """Points at which the sup of |w| over the domain is attained or sampled."""
        raise NotImplementedError

    def negated(self) -> "WindField":
        raise NotImplementedError


class AffineWind(WindField):
    """w(x) = c + A x on a rectangle.

    ``A`` has rows ``(a1, b1)`` and ``(a2, b2)`` so that
    ``w1 = c1 + a1 x1 + b1 x2`` and ``w2 = c2 + a2 x1 + b2 x2``.
    """

    def __init__(self, c, A, domain: Domain, margin: float = DEFAULT_MARGIN):
        self.c = np.array(c, dtype=float).reshape(2)
        self.A = np.array(A, dtype=float).reshape(2, 2)
        self.c.setflags(write=False)
        self.A.setflags(write=False)
        self.domain = domain
        self.margin = float(margin)

    @classmethod
    def constant(cls, c, domain: Domain, margin: float = DEFAULT_MARGIN):
        return cls(c, np.zeros((2, 2)), domain, margin)

    @property
    def coefficients(self) -> dict[str, float]:
        (a1, b1), (a2, b2) = self.A
        return dict(c1=self.c[0], c2=self.c[1], a1=a1, b1=b1, a2=a2, b2=b2)

    def _value(self, x):
        extra = (1,) * (x.ndim - 1)
        return self.c.reshape((2,) + extra) + np.tensordot(self.A, x, axes=1)

    def _jacobian(self, x):
        return np.broadcast_to(self.A.reshape((2, 2) + (1,) * (x.ndim - 1)),
                               (2, 2) + x.shape[1:]).copy()

    def candidate_maxima(self):
        # |c + A x| is convex, so its max over a rectangle sits at a vertex
        return self.domain.corners()

    def negated(self):
        return AffineWind(-self.c, -self.A, self.domain, self.margin)

    def __repr__(self):
        return (f"AffineWind(c={self.c.tolist()}, A={self.A.tolist()}, "
                f"domain={self.domain.bounds})")


class GridWind(WindField):
    """Bilinear interpolation of sampled components.

    ``u[j, i]`` and ``v[j, i]`` are the samples at
    ``(origin[0] + i*spacing[0], origin[1] + j*spacing[1])``: rows run along
    x2, columns along x1.  A point on an interior cell edge belongs to the
    cell below/left of it.
    """

    def __init__(self, origin, spacing, u, v, margin: float = DEFAULT_MARGIN):
        self.origin = np.array(origin, dtype=float).reshape(2)
        self.spacing = np.array(spacing, dtype=float).reshape(2)
        self.u = np.array(u, dtype=float)
        self.v = np.array(v, dtype=float)
        if self.u.ndim != 2 or self.u.shape != self.v.shape:
            raise ValueError("u and v must be 2-D arrays of the same shape")
        if min(self.u.shape) < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if np.any(self.spacing <= 0):
            raise ValueError("grid spacing must be positive")
        for arr in (self.origin, self.spacing, self.u, self.v):
            arr.setflags(write=False)
        ny, nx = self.u.shape
        self.domain = Domain(self.origin[0], self.origin[0] + (nx - 1) * self.spacing[0],
                             self.origin[1], self.origin[1] + (ny - 1) * self.spacing[1])
        self.margin = float(margin)

    def _locate(self, x):
        ny, nx = self.u.shape
        fx = (x[0] - self.origin[0]) / self.spacing[0]
        fy = (x[1] - self.origin[1]) / self.spacing[1]
        i = np.clip(np.ceil(fx).astype(int) - 1, 0, nx - 2)
        j = np.clip(np.ceil(fy).astype(int) - 1, 0, ny - 2)
        return i, j, fx - i, fy - j

    def _value(self, x):
        i, j, s, t = self._locate(x)
        out = []
        for f in (self.u, self.v):
            out.append((1 - s) * (1 - t) * f[j, i] + s * (1 - t) * f[j, i + 1]
                       + (1 - s) * t * f[j + 1, i] + s * t * f[j + 1, i + 1])
        return np.stack(out)

    def _jacobian(self, x):
        i, j, s, t = self._locate(x)
        rows = []
        for f in (self.u, self.v):
            d1 = ((1 - t) * (f[j, i + 1] - f[j, i]) + t * (f[j + 1, i + 1] - f[j + 1, i])) / self.spacing[0]
            d2 = ((1 - s) * (f[j + 1, i] - f[j, i]) + s * (f[j + 1, i + 1] - f[j, i + 1])) / self.spacing[1]
            rows.append(np.stack([d1, d2]))
        return np.stack(rows)

    def candidate_maxima(self):
        # bilinear components are affine along grid lines, so the norm peaks at samples
        ny, nx = self.u.shape
        g1, g2 = np.meshgrid(self.origin[0] + self.spacing[0] * np.arange(nx),
                             self.origin[1] + self.spacing[1] * np.arange(ny))
        return np.stack([g1.ravel(), g2.ravel()])

    def negated(self):
        return GridWind(self.origin, self.spacing, -self.u, -self.v, self.margin)


class AnalyticWind(WindField):
    """Wind given by a vectorised callable ``func(x) -> (2, ...)``.

    Without ``jac`` the Jacobian comes from central differences.  Weakness is
    checked on a ``sample_count x sample_count`` grid, which is only as good as
    that sampling.
    """

    def __init__(self, func: Callable, domain: Domain, jac: Callable | None = None,
                 margin: float = DEFAULT_MARGIN, sample_count: int = 201):
        self.func = func
        self.jac = jac
        self.domain = domain
        self.margin = float(margin)
        self.sample_count = sample_count

    def _value(self, x):
        return np.asarray(self.func(x), dtype=float)

    def _jacobian(self, x):
        if self.jac is not None:
            return np.asarray(self.jac(x), dtype=float)
        h = 1e-6 * np.maximum(1.0, np.sqrt(x[0] ** 2 + x[1] ** 2))
        cols = []
        for k in range(2):
            e = np.zeros_like(x)
            e[k] = h
            cols.append((self._value(x + e) - self._value(x - e)) / (2 * h))
        return np.stack(cols, axis=1)

    def candidate_maxima(self):
        return self.domain.grid(self.sample_count)

    def negated(self):
        jac = None if self.jac is None else (lambda x: -np.asarray(self.jac(x)))
        return AnalyticWind(lambda x: -np.asarray(self.func(x)), self.domain, jac,
                            self.margin, self.sample_count)


def eval_wind(field: WindField, x) -> np.ndarray:
    return field.value(x)


def jacobian_wind(field: WindField, x) -> np.ndarray:
    return field.jacobian(x)


def validate_weak(field: WindField, margin: float | None = None,
                  strict: bool = True) -> WeakReport:
    """Supremum of |w| over the field's domain.

    Raises ``FieldNotWeak`` when the supremum exceeds ``margin`` (default: the
    field's own margin) unless ``strict`` is false.
    """
    margin = field.margin if margin is None else float(margin)
    if not 0.0 < margin <= 1.0:
        raise ValueError("margin must lie in (0, 1]")
    pts = field.candidate_maxima()
    w = field.value(pts, check=False)
    norms = np.hypot(w[0], w[1])
    k = int(np.argmax(norms))
    report = WeakReport(float(norms[k]), (float(pts[0, k]), float(pts[1, k])), margin)
    if strict and not report.passed:
        raise FieldNotWeak(report.max_norm, report.location, margin)
    return report


def affine_fit(field: WindField, rect: Domain, samples_per_axis: int = 5,
               margin: float | None = None) -> tuple[AffineWind, float]:
    """Least-squares affine approximation of ``field`` over ``rect``.

    Returns the fitted ``AffineWind`` (domain ``rect``) and the largest
    Euclidean fit error among the sample points.
    """
    if samples_per_axis < 2:
        raise ValueError("samples_per_axis must be at least 2")
    if not field.domain.contains_rect(rect):
        raise PointOutsideDomain(rect.corners()[:, 0], field.domain)
    pts = rect.grid(samples_per_axis)
    w = field.value(pts)
    design = np.column_stack([np.ones(pts.shape[1]), pts[0], pts[1]])
    coef, *_ = np.linalg.lstsq(design, w.T, rcond=None)
    c = coef[0]
    A = coef[1:].T
    fitted = AffineWind(c, A, rect, field.margin if margin is None else margin)
    resid = fitted.value(pts) - w
    validate_weak(fitted)
    return fitted, float(np.max(np.hypot(resid[0], resid[1])))


# -- wind spec documents -------------------------------------------------------

def _vector(doc, key, n=2):
    try:
        vals = [float(v) for v in doc[key]]
    except KeyError:
        raise ParseError(f"missing key {key!r}") from None
    except (TypeError, ValueError):
        raise ParseError(f"{key!r} must be a list of numbers") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise ParseError(f"{key!r} must hold {n} finite numbers")
    return vals


def _matrix(doc, key):
    try:
        arr = np.array(doc[key], dtype=float)
    except KeyError:
        raise ParseError(f"missing key {key!r}") from None
    except (TypeError, ValueError):
        raise ParseError(f"{key!r} must be a nested list of numbers") from None
    if arr.ndim != 2 or not np.all(np.isfinite(arr)):
        raise ParseError(f"{key!r} must be a finite 2-D array")
    return arr


def parse_wind_spec(doc: dict) -> WindField:
    if not isinstance(doc, dict):
        raise ParseError("wind spec must be a JSON object")
    try:
        margin = float(doc.get("margin", DEFAULT_MARGIN))
    except (TypeError, ValueError):
        raise ParseError("'margin' must be a number") from None
    if not 0.0 < margin <= 1.0:
        raise ParseError("'margin' must lie in (0, 1]")
    kind = doc.get("type")
    try:
        if kind == "affine":
            A = _matrix(doc, "A")
            if A.shape != (2, 2):
                raise ParseError("'A' must be 2x2")
            return AffineWind(_vector(doc, "c"), A, Domain(*_vector(doc, "domain", 4)), margin)
        if kind == "grid":
            return GridWind(_vector(doc, "origin"), _vector(doc, "spacing"),
                            _matrix(doc, "u"), _matrix(doc, "v"), margin)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown wind type {kind!r}")


def load_wind_spec(source: str | PathLike) -> WindField:
    """Build a field from a JSON wind spec (a path or the document text) and
    check that it is weak under the document's margin."""
    if isinstance(source, PathLike) or not str(source).lstrip().startswith("{"):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read wind spec: {exc}") from exc
    else:
        text = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed wind spec: {exc}") from exc
    field = parse_wind_spec(doc)
    validate_weak(field)
    return field


def wind_spec_dict(field: WindField) -> dict:
    if isinstance(field, AffineWind):
        return {"type": "affine", "c": field.c.tolist(), "A": field.A.tolist(),
                "domain": list(field.domain.bounds), "margin": field.margin}
    if isinstance(field, GridWind):
        return {"type": "grid", "origin": field.origin.tolist(),
                "spacing": field.spacing.tolist(), "u": field.u.tolist(),
                "v": field.v.tolist(), "margin": field.margin}
    raise TypeError(f"{type(field).__name__} has no wind spec representation")


def dump_wind_spec(field: WindField) -> str:
    return json.dumps(wind_spec_dict(field))
