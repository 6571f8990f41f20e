"""Invariant suite run by ``zermelo verify``.

Each check returns a :class:`CheckResult`; the worst observed error is
compared against a fixed tolerance.  Random checks draw from a seeded
generator so a given seed always reproduces the same report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affine_spray import affine_spray_eval
from .control import optimize_headings
from .fixtures import PROBLEMS, FixtureProblem, load_fixture, problem_arrays
from .geodesic import integrate_geodesic
from .navigator import NavigationProblem, solve_navigation
from .randers import metric_value, navigation_tensors, randers_data, hessian_spray, zeta_spray
from .wind import AffineWind, Domain, GridWind, validate_weak

UNIT_SQUARE = Domain(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<28s} worst={self.value:.3e}  tol={self.tolerance:.1e}  {self.detail}"


def _result(name, value, tol, detail=""):
    return CheckResult(name, bool(value <= tol), float(value), tol, detail)


def random_weak_affine(rng, domain: Domain = UNIT_SQUARE, scale: float = 0.3,
                       max_norm: float = 0.8) -> AffineWind:
    """Random affine wind whose supremum over ``domain`` is at most ``max_norm``."""
    while True:
        field = AffineWind(rng.uniform(-scale, scale, 2), rng.uniform(-scale, scale, (2, 2)), domain)
        if validate_weak(field, strict=False).max_norm <= max_norm:
            return field


def random_unit(rng, size=None):
    phi = rng.uniform(-math.pi, math.pi, size)
    return np.array([np.cos(phi), np.sin(phi)])


def _interior(rng, domain: Domain, n, pad=0.0):
    lo1, hi1, lo2, hi2 = domain.bounds
    return np.array([rng.uniform(lo1 + pad, hi1 - pad, n), rng.uniform(lo2 + pad, hi2 - pad, n)])


def _rel(a, b):
    return float(np.linalg.norm(a - b) / max(float(np.linalg.norm(b)), 1e-300))


# -- pointwise metric and spray checks ----------------------------------------

def check_indicatrix(rng, n=200):
    worst = 0.0
    for _ in range(n):
        field = random_weak_affine(rng)
        w = field.value(_interior(rng, field.domain, 1)[:, 0])
        worst = max(worst, abs(float(metric_value(w, w + random_unit(rng))) - 1.0))
    return _result("indicatrix", worst, 1e-12)


def check_randers_decomposition(rng, n=200):
    worst = 0.0
    for _ in range(n):
        field = random_weak_affine(rng)
        w = field.value(_interior(rng, field.domain, 1)[:, 0])
        y = rng.normal(size=2)
        data = randers_data(w)
        worst = max(worst, abs(float(data(y)) - float(metric_value(w, y))) / max(1.0, np.hypot(*y)),
                    abs(data.b_norm_sq() - float(w @ w)))
    return _result("randers_decomposition", worst, 1e-12)


def check_spray_equivalence(rng, fields=5, points=20):
    closed, fd = 0.0, 0.0
    for _ in range(fields):
        field = random_weak_affine(rng)
        for _ in range(points):
            x = _interior(rng, field.domain, 1, pad=0.01)[:, 0]
            y = rng.normal(size=2)
            z = zeta_spray(field, x, y)
            closed = max(closed, _rel(affine_spray_eval(field, x, y), z))
            fd = max(fd, _rel(hessian_spray(field, x, y), z))
    return [_result("spray_closed_form", closed, 1e-9, "affine vs general"),
            _result("spray_hessian_oracle", fd, 1e-6, "general vs finite differences")]


def check_s_plus_t(rng, n=200):
    worst = 0.0
    for _ in range(n):
        field = random_weak_affine(rng)
        x = _interior(rng, field.domain, 1)[:, 0]
        w, J = field.value(x), field.jacobian(x)
        tens = navigation_tensors(w, J)
        worst = max(worst, float(np.max(np.abs(tens.S + tens.T - 2.0 * J.T @ w))))
    return _result("s_plus_t_gradient", worst, 1e-12)


def check_homogeneity(rng, n=200):
    worst_f, worst_g = 0.0, 0.0
    for _ in range(n):
        field = random_weak_affine(rng)
        x = _interior(rng, field.domain, 1)[:, 0]
        w = field.value(x)
        y = rng.normal(size=2)
        lam = rng.uniform(0.1, 10.0)
        worst_f = max(worst_f, abs(float(metric_value(w, lam * y)) - lam * float(metric_value(w, y)))
                      / (lam * float(metric_value(w, y))))
        worst_g = max(worst_g, _rel(zeta_spray(field, x, lam * y), lam ** 2 * zeta_spray(field, x, y)))
    return [_result("homogeneity_F", worst_f, 1e-12), _result("homogeneity_G", worst_g, 1e-12)]


def check_grid_reproduces_affine(rng, n=5):
    worst = 0.0
    for _ in range(n):
        field = random_weak_affine(rng)
        xs = np.linspace(0.0, 1.0, 6)
        X1, X2 = np.meshgrid(xs, xs)
        w = field.value(np.array([X1, X2]))
        grid = GridWind((0.0, 0.0), (0.2, 0.2), w[0], w[1])
        pts = _interior(rng, field.domain, 50)
        worst = max(worst, float(np.max(np.abs(grid.value(pts) - field.value(pts)))),
                    float(np.max(np.abs(grid.jacobian(pts) - field.jacobian(pts)))))
    return _result("grid_bilinear_exact", worst, 1e-12)


# -- trajectory checks --------------------------------------------------------

def rotation_geodesic_exact(omega, x0, theta0, t):
    """Rigid rotation is a Killing field: the optimal path is a straight line
    carried along by the flow, ``Rot(-omega t)(x0 + t u0)``."""
    u0 = np.array([math.cos(theta0), math.sin(theta0)])
    p = np.asarray(x0, dtype=float)[:, None] + np.outer(u0, t)
    c, s = np.cos(omega * t), np.sin(omega * t)
    return np.array([c * p[0] + s * p[1], -s * p[0] + c * p[1]]).T


def check_rotation_geodesics(rng, n=3, omega=0.1):
    field = load_fixture("rotation")
    drift, path = 0.0, 0.0
    for _ in range(n):
        theta = rng.uniform(-math.pi, math.pi)
        x0 = -5.0 * np.array([math.cos(theta), math.sin(theta)])
        traj = integrate_geodesic(field, x0, theta, 10.0)
        drift = max(drift, traj.max_speed_error(),
                    float(np.max(np.abs(np.hypot(*(traj.y - field.value(traj.x.T).T).T) - 1.0))))
        path = max(path, float(np.max(np.abs(traj.x - rotation_geodesic_exact(omega, x0, theta, traj.t)))))
    return [_result("first_integral", drift, 1e-8, "|F-1| and |y-w|-1 to t=10"),
            _result("rotation_killing_oracle", path, 1e-8, "vs rotated straight line")]


class _Solutions:
    """Lazily solved fixture problems shared between checks."""

    def __init__(self, problems):
        self.problems = list(problems)
        self._cache = {}

    def get(self, p: FixtureProblem, reverse=False):
        key = (p.name, reverse)
        if key not in self._cache:
            field, s, g = problem_arrays(p)
            if reverse:
                field, s, g = field.negated(), g, s
            self._cache[key] = (field, solve_navigation(NavigationProblem(field, s, g)))
        return self._cache[key]


def check_analytic_times(sols: _Solutions):
    worst, names = 0.0, []
    for p in sols.problems:
        if p.expected_time is None:
            continue
        worst = max(worst, abs(sols.get(p)[1].time - p.expected_time))
        names.append(p.name)
    if not names:
        return []
    return [_result("analytic_times", worst, 1e-6, ",".join(names))]


def check_navigation_contract(sols: _Solutions):
    out = []
    for p in sols.problems:
        field, sol = sols.get(p)
        prob = NavigationProblem(field, p.start, p.goal)
        lo, hi = prob.time_bracket()
        slack = prob.goal_radius / (1.0 - prob.max_wind)
        excess = max(sol.residual_miss - prob.goal_radius, sol.time - prob.t_ceiling,
                     lo - slack - sol.time, sol.time - hi - slack, 0.0)
        out.append(excess)
    return [_result("navigation_bracket", max(out), 0.0, "residual, ceiling and time bracket")]


def check_zero_wind(sols: _Solutions):
    zero = [p for p in sols.problems if p.field_name == "zero"]
    if not zero:
        return []
    p = zero[0]
    _, sol = sols.get(p)
    s, g = np.array(p.start), np.array(p.goal)
    e = (g - s) / np.hypot(*(g - s))
    off = sol.trajectory.x - s
    straight = float(np.max(np.abs(e[0] * off[:, 1] - e[1] * off[:, 0])))
    return [_result("zero_wind_time", abs(sol.time - float(np.hypot(*(g - s)))), 1e-8),
            _result("zero_wind_straightness", straight, 1e-10)]


def check_reversal(sols: _Solutions):
    worst = 0.0
    for p in sols.problems:
        worst = max(worst, abs(sols.get(p)[1].time - sols.get(p, reverse=True)[1].time))
    return [_result("reversal_duality", worst, 1e-6)]


def check_control_oracle(sols: _Solutions, segments=32):
    rel, undercut = 0.0, 0.0
    names = []
    for p in sols.problems:
        if p.field_name not in ("rotation", "generic_affine"):
            continue
        field, sol = sols.get(p)
        _, t_ctrl = optimize_headings(field, p.start, p.goal, segments)
        rel = max(rel, abs(t_ctrl - sol.time) / sol.time)
        undercut = max(undercut, sol.time - t_ctrl)
        names.append(p.name)
    if not names:
        return []
    return [_result("control_agreement", rel, 0.01, ",".join(names)),
            _result("control_dominance", undercut, 1e-6, "geodesic time minus control time")]


def run_suite(seed: int = 0, problems=None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = [check_indicatrix(rng), check_randers_decomposition(rng)]
    results += check_spray_equivalence(rng)
    results.append(check_s_plus_t(rng))
    results += check_homogeneity(rng)
    results.append(check_grid_reproduces_affine(rng))
    results += check_rotation_geodesics(rng)
    sols = _Solutions(PROBLEMS if problems is None else problems)
    for check in (check_analytic_times, check_navigation_contract, check_zero_wind,
                  check_reversal, check_control_oracle):
        results += check(sols)
    return results
