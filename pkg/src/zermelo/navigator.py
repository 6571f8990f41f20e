"""Start-to-goal boundary-value problem solved by shooting on the heading.

A unit-speed geodesic from the start is fixed by its initial steering
heading.  For each heading we integrate up to a time ceiling and record the
closest approach to the goal; the signed miss (positive left of the
start->goal line) changes sign across headings that hit the goal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GoalUnreachable, NoConvergence
from .geodesic import IntegratorOptions, Trajectory, flow_function, integrate_geodesic
from .integrate import DormandPrince, bisect_root
from .wind import WindField, validate_weak

SCAN_HEADINGS = 64
MAX_REFINEMENTS = 100
TIE_TOLERANCE = 1e-9


def wrap_angle(theta):
    """Map angles into (-pi, pi]."""
    out = -((-np.asarray(theta, dtype=float) + math.pi) % (2 * math.pi) - math.pi)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class NavigationProblem:
    field: WindField
    start: np.ndarray
    goal: np.ndarray
    goal_radius: float = 1e-6
    t_ceiling: float | None = None

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=float).reshape(2)
        self.goal = np.asarray(self.goal, dtype=float).reshape(2)
        if np.allclose(self.start, self.goal, rtol=0, atol=0):
            raise ValueError("start and goal coincide")
        if self.goal_radius <= 0:
            raise ValueError("goal_radius must be positive")
        self.field.value(np.stack([self.start, self.goal], axis=1))   # domain check
        self.max_wind = validate_weak(self.field).max_norm
        if self.t_ceiling is None:
            self.t_ceiling = 2.0 * self.distance / (1.0 - self.max_wind)

    @property
    def distance(self) -> float:
        return float(np.hypot(*(self.goal - self.start)))

    @property
    def bearing(self) -> float:
        d = self.goal - self.start
        return math.atan2(d[1], d[0])

    def time_bracket(self) -> tuple[float, float]:
        d, W = self.distance, self.max_wind
        return d / (1.0 + W), d / (1.0 - W)


@dataclass(frozen=True)
class Shots:
    """Outcome of shooting a set of headings (one entry per heading)."""

    theta: np.ndarray
    miss: np.ndarray          # signed distance at closest approach
    time: np.ndarray          # time of closest approach
    exited: np.ndarray        # left the domain before t_ceiling
    at_start: np.ndarray      # closest approach is the start point itself
    evaluations: int


@dataclass(frozen=True)
class NavigationSolution:
    theta0: float
    time: float
    trajectory: Trajectory
    residual_miss: float
    evaluations: int
    candidates: list = dc_field(default_factory=list)

    def summary(self) -> dict:
        return {"time": self.time, "theta0": self.theta0,
                "residual_miss": self.residual_miss, "evaluations": self.evaluations,
                "terminal_reason": self.trajectory.terminal_reason,
                "candidates": [dict(theta0=c[0], time=c[1], miss=c[2]) for c in self.candidates]}


def shoot(problem: NavigationProblem, thetas, opts: IntegratorOptions | None = None) -> Shots:
    """Integrate all headings together and locate each closest approach."""
    opts = opts or IntegratorOptions()
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    m = thetas.size
    field, domain = problem.field, problem.field.domain
    s, g = problem.start, problem.goal
    w0 = field.value(s)
    Y0 = np.empty((4, m))
    Y0[0], Y0[1] = s[0], s[1]
    Y0[2] = w0[0] + np.cos(thetas)
    Y0[3] = w0[1] + np.sin(thetas)
    solver = DormandPrince(flow_function(field), 0.0, Y0, problem.t_ceiling,
                           opts.rtol, opts.atol, opts.first_step, opts.max_step)

    best_d = np.full(m, problem.distance)
    best_t = np.zeros(m)
    best_p = np.tile(s.reshape(2, 1), (1, m))
    exited = np.zeros(m, dtype=bool)
    active = np.arange(m)

    def approach(t):
        S = solver.dense(t)
        return (S[0] - g[0]) * S[2] + (S[1] - g[1]) * S[3]

    def offer(cols, t, P):
        d = np.hypot(P[0] - g[0], P[1] - g[1])
        idx = active[cols]
        better = d < best_d[idx]
        idx = idx[better]
        best_d[idx] = d[better]
        best_t[idx] = t[better]
        best_p[:, idx] = P[:, better]

    while not solver.done and active.size:
        solver.step()
        n = active.size
        t0 = np.full(n, solver.t_old)
        t_end = np.full(n, solver.t)
        out = ~domain.contains(solver.y[:2])
        if out.any():
            hi, lo = bisect_root(lambda t: domain.outside_distance(solver.dense(t)[:2]),
                                 t0, t_end)
            t_end = np.where(out, lo, t_end)
        dip = (approach(t0) < 0.0) & (approach(t_end) >= 0.0)
        if dip.any():
            hi, lo = bisect_root(approach, t0, t_end)
            tc = 0.5 * (hi + lo)
            offer(dip, tc[dip], solver.dense(tc)[:2, dip])
        last = out | solver.done
        if last.any():
            offer(last, t_end[last], solver.dense(t_end)[:2, last])
        if out.any():
            exited[active[out]] = True
            solver.keep(~out)
            active = active[~out]

    e = (g - s) / problem.distance
    cross = e[0] * (best_p[1] - g[1]) - e[1] * (best_p[0] - g[0])
    miss = np.where(cross >= 0.0, best_d, -best_d)
    return Shots(thetas, miss, best_t, exited, best_t == 0.0, solver.n_evals)


def miss_distance(problem: NavigationProblem, theta0: float,
                  opts: IntegratorOptions | None = None) -> tuple[float, float]:
    """Signed miss at closest approach and the time it happens."""
    r = shoot(problem, [theta0], opts)
    return float(r.miss[0]), float(r.time[0])


def _refine(problem, opts, a, fa, b, fb, counter):
    """Illinois-modified secant iteration on a sign-changing bracket.

    Returns ``(theta, miss, time)`` of the best shot, or None.
    """
    radius = problem.goal_radius
    target = 1e-3 * radius
    best = None
    for _ in range(MAX_REFINEMENTS):
        c = b - fb * (b - a) / (fb - fa)
        lo, hi = min(a, b), max(a, b)
        if not lo < c < hi:
            c = 0.5 * (a + b)
        fc, tc = miss_distance(problem, c, opts)
        counter[0] += 1
        if best is None or abs(fc) < abs(best[1]):
            best = (c, fc, tc)
        if abs(fc) <= target:
            break
        if fc * fb < 0.0:
            a, fa = b, fb
        else:
            fa *= 0.5
        b, fb = c, fc
        if abs(b - a) <= 4 * np.spacing(max(abs(a), abs(b), 1.0)):
            break
    if best is not None and abs(best[1]) <= radius:
        return best
    return None


def solve_navigation(problem: NavigationProblem, opts: IntegratorOptions | None = None,
                     n_headings: int = SCAN_HEADINGS) -> NavigationSolution:
    """Fastest heading from start to goal.

    Scans ``n_headings`` equally spaced headings (the first one pointing
    straight at the goal), refines every sign change of the signed miss and
    returns the hit with the smallest arrival time; near-ties go to the
    smaller ``|theta0|``.
    """
    opts = opts or IntegratorOptions()
    step = 2 * math.pi / n_headings
    thetas = problem.bearing + step * np.arange(n_headings)
    scan = shoot(problem, thetas, opts)
    counter = [n_headings]
    radius, d = problem.goal_radius, problem.distance

    hits = []
    for k in range(n_headings):
        if abs(scan.miss[k]) <= radius:
            hits.append((float(thetas[k]), float(scan.miss[k]), float(scan.time[k])))
    brackets = 0
    for k in range(n_headings):
        j = (k + 1) % n_headings
        ma, mb = scan.miss[k], scan.miss[j]
        if not ma * mb < 0.0 or min(abs(ma), abs(mb)) <= radius:
            continue
        # jump between the "never approaches" branch and a far pass, not a root
        if (scan.at_start[k] or scan.at_start[j]) and min(abs(ma), abs(mb)) >= 0.5 * d:
            continue
        brackets += 1
        found = _refine(problem, opts, float(thetas[k]), float(ma),
                        float(thetas[k] + step), float(mb), counter)
        if found is not None:
            hits.append(found)

    if not hits:
        if brackets == 0 and np.all(scan.exited & (scan.time > 0)):
            raise GoalUnreachable("every heading leaves the domain before reaching the goal")
        raise NoConvergence(f"no heading reached the goal within {radius:g} "
                            f"({brackets} bracket(s) refined)")

    lo, hi = problem.time_bracket()
    slack = radius / (1.0 - problem.max_wind) + 1e-9
    cands = sorted(((wrap_angle(th), t, m) for th, m, t in hits), key=lambda c: c[1])
    cands = [c for c in cands if lo - slack <= c[1] <= hi + slack]
    if not cands:
        raise NoConvergence("all hits violate the analytic travel-time bracket")
    fastest = cands[0][1]
    theta0, _, miss0 = min((c for c in cands if c[1] - fastest < TIE_TOLERANCE),
                           key=lambda c: (abs(c[0]), c[0]))
    traj = integrate_geodesic(problem.field, problem.start, theta0, problem.t_ceiling,
                              opts=opts, goal=problem.goal,
                              goal_radius=max(radius, 2.0 * abs(miss0)))
    counter[0] += 1
    if traj.terminal_reason != "goal_event":
        raise NoConvergence("re-integration of the selected heading missed the goal")
    residual = float(np.hypot(*(traj.x[-1] - problem.goal)))
    return NavigationSolution(theta0, traj.duration, traj, residual, counter[0],
                              [(float(c[0]), float(c[1]), float(c[2])) for c in cands])
