"""Direct optimisation of piecewise-constant steering, as an independent check.

This module never touches the Randers metric or its spray.  It simulates the
raw control system

    x1' = cos(theta(t)) + w1(x),    x2' = sin(theta(t)) + w2(x)

with ``theta`` constant on equal-duration segments and minimises arrival time
by coordinate descent with golden-section line searches.

The goal constraint is eliminated rather than penalised: for a given heading
shape, a small Newton solve finds the common rotation ``phi`` of all headings
and the total time ``T`` that land exactly on the goal, so every objective
value is the arrival time of a feasible schedule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DomainExit, NoConvergence
from .geodesic import IntegratorOptions, Trajectory
from .integrate import DormandPrince, bisect_root
from .randers import metric_value
from .wind import AffineWind, WindField

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class HeadingSchedule:
    total_time: float
    headings: tuple

    def __post_init__(self):
        object.__setattr__(self, "headings", tuple(float(h) for h in self.headings))
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if not self.headings:
            raise ValueError("schedule needs at least one segment")
        if not all(math.isfinite(h) for h in self.headings):
            raise ValueError("headings must be finite")

    @property
    def segment_count(self) -> int:
        return len(self.headings)

    @property
    def segment_duration(self) -> float:
        return self.total_time / self.segment_count

    def heading_at(self, t: float) -> float:
        k = min(int(t / self.segment_duration), self.segment_count - 1)
        return self.headings[max(k, 0)]

    def refined(self, factor: int = 2) -> "HeadingSchedule":
        """Same control with every segment split into ``factor`` pieces."""
        return HeadingSchedule(self.total_time, [h for h in self.headings for _ in range(factor)])


def simulate_control(field: WindField, x0, schedule: HeadingSchedule, *,
                     opts: IntegratorOptions | None = None,
                     raise_on_exit: bool = False) -> Trajectory:
    """Integrate the steering dynamics segment by segment."""
    opts = opts or IntegratorOptions()
    domain = field.domain
    x = np.asarray(x0, dtype=float).reshape(2)
    field.value(x)
    times, xs, ths = [0.0], [x.copy()], [schedule.headings[0]]
    reason = "time_limit"
    h = schedule.segment_duration
    for k, theta in enumerate(schedule.headings):
        u = np.array([math.cos(theta), math.sin(theta)])
        t0 = k * h
        t1 = schedule.total_time if k == schedule.segment_count - 1 else (k + 1) * h
        solver = DormandPrince(lambda t, z: u + field.value(z, check=False), t0, x, t1,
                               opts.rtol, opts.atol, opts.first_step, opts.max_step)
        while not solver.done:
            solver.step()
            if not domain.contains(solver.y):
                hi, lo = bisect_root(lambda t: domain.outside_distance(solver.dense(t)),
                                     solver.t_old, solver.t)
                times.append(float(lo))
                xs.append(solver.dense(float(lo)))
                ths.append(theta)
                reason = "domain_exit"
                break
            times.append(solver.t)
            xs.append(solver.y.copy())
            ths.append(theta)
        if reason != "time_limit":
            break
        x = solver.y
    xs = np.array(xs)
    w = field.value(xs.T, check=False)
    u = np.stack([np.cos(ths), np.sin(ths)])
    ys = (u + w).T
    traj = Trajectory(np.array(times), xs, ys, metric_value(w, u + w), np.array(ths), reason,
                      {"segments": schedule.segment_count})
    if reason == "domain_exit" and raise_on_exit:
        raise DomainExit(traj)
    return traj


class _AffinePropagator:
    """Exact segment-to-segment flow of ``x' = c + A x + u``."""

    def __init__(self, field: AffineWind, x0, n: int):
        self.field = field
        self.c = [float(v) for v in field.c]
        self.A = [[float(v) for v in row] for row in field.A]
        self.x0 = [float(v) for v in x0]
        self.n = n
        self._cache = (None, None)

    def _maps(self, T):
        if self._cache[0] != T:
            big = np.zeros((4, 4))
            big[:2, :2] = self.field.A
            big[:2, 2:] = np.eye(2)
            M = expm(big * (T / self.n))
            self._cache = (T, ([[M[0, 0], M[0, 1]], [M[1, 0], M[1, 1]]],
                               [[M[0, 2], M[0, 3]], [M[1, 2], M[1, 3]]]))
        return self._cache[1]

    def run(self, theta, T):
        """Endpoint plus its derivatives w.r.t. a common rotation and ``T``."""
        (e00, e01), (e10, e11) = self._maps(T)[0]
        (p00, p01), (p10, p11) = self._maps(T)[1]
        (a00, a01), (a10, a11) = self.A
        c0, c1 = self.c
        x0, x1 = self.x0
        r0 = r1 = d0 = d1 = 0.0
        lo1, hi1, lo2, hi2 = self.field.domain.bounds
        inside = True
        for th in theta:
            cu, su = math.cos(th), math.sin(th)
            g0, g1 = c0 + cu, c1 + su
            x0, x1 = e00 * x0 + e01 * x1 + p00 * g0 + p01 * g1, e10 * x0 + e11 * x1 + p10 * g0 + p11 * g1
            r0, r1 = e00 * r0 + e01 * r1 - p00 * su + p01 * cu, e10 * r0 + e11 * r1 - p10 * su + p11 * cu
            f0 = a00 * x0 + a01 * x1 + g0
            f1 = a10 * x0 + a11 * x1 + g1
            d0, d1 = e00 * d0 + e01 * d1 + f0, e10 * d0 + e11 * d1 + f1
            inside = inside and lo1 <= x0 <= hi1 and lo2 <= x1 <= hi2
        n = self.n
        return np.array([x0, x1]), np.array([r0, r1]), np.array([d0 / n, d1 / n]), inside


class _SimulatedPropagator:
    """Adaptive simulation with finite-difference sensitivities (any field)."""

    def __init__(self, field: WindField, x0, n: int, opts: IntegratorOptions):
        self.field, self.x0, self.n, self.opts = field, np.asarray(x0, dtype=float), n, opts

    def _end(self, theta, T):
        traj = simulate_control(self.field, self.x0, HeadingSchedule(T, theta), opts=self.opts)
        return traj.x[-1], traj.terminal_reason == "time_limit"

    def run(self, theta, T):
        theta = np.asarray(theta, dtype=float)
        end, ok = self._end(theta, T)
        hp, hT = 1e-6, 1e-6 * max(T, 1.0)
        ep, _ = self._end(theta + hp, T)
        em, _ = self._end(theta - hp, T)
        tp, _ = self._end(theta, T + hT)
        tm, _ = self._end(theta, T - hT)
        return end, (ep - em) / (2 * hp), (tp - tm) / (2 * hT), ok


def _land(prop, goal, theta, phi, T, tol):
    """Newton solve for (phi, T) that puts the endpoint on the goal."""
    for _ in range(40):
        end, dphi, dT, inside = prop.run(theta + phi, T)
        r = end - goal
        if math.hypot(r[0], r[1]) <= tol:
            return (phi, T) if inside else None
        jac = np.column_stack([dphi, dT])
        try:
            dp, dt = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return None
        dp = max(-0.5, min(0.5, dp))
        T = T + dt if T + dt > 0 else 0.5 * T
        phi += dp
    return None


def golden_section(f, lo, hi, xtol):
    """Minimise ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def crab_schedule(field: WindField, start, goal, segment_count: int,
                  resolution: int = 400) -> HeadingSchedule:
    """Steer so that the ground track is the straight start->goal segment."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    d = float(np.hypot(*(goal - start)))
    e = (goal - start) / d
    s = np.linspace(0.0, d, resolution + 1)
    pts = start[:, None] + e[:, None] * s
    w = field.value(pts)
    ew = e @ w
    speed = ew + np.sqrt(1.0 - (w * w).sum(axis=0) + ew * ew)
    inv = 1.0 / speed
    tau = np.concatenate([[0.0], np.cumsum(0.5 * (inv[1:] + inv[:-1]) * np.diff(s))])
    T = float(tau[-1])
    mids = (np.arange(segment_count) + 0.5) * T / segment_count
    sm = np.interp(mids, tau, s)
    pm = start[:, None] + e[:, None] * sm
    wm = field.value(pm)
    ewm = e @ wm
    um = e[:, None] * (ewm + np.sqrt(1.0 - (wm * wm).sum(axis=0) + ewm * ewm)) - wm
    return HeadingSchedule(T, np.arctan2(um[1], um[0]))


def optimize_headings(field: WindField, start, goal, segment_count: int = 32,
                      tol: float = 1e-9, max_sweeps: int = 500,
                      init: HeadingSchedule | None = None,
                      opts: IntegratorOptions | None = None) -> tuple[HeadingSchedule, float]:
    """Minimum arrival time over equal-segment heading schedules.

    Starts from ``init`` (default: the straight-line crab schedule) and runs
    coordinate sweeps until one sweep gains less than ``tol`` in time.
    """
    start = np.asarray(start, dtype=float).reshape(2)
    goal = np.asarray(goal, dtype=float).reshape(2)
    field.value(np.stack([start, goal], axis=1))
    if init is None:
        init = crab_schedule(field, start, goal, segment_count)
    elif init.segment_count != segment_count:
        raise ValueError("init schedule has the wrong number of segments")
    if isinstance(field, AffineWind):
        prop = _AffinePropagator(field, start, segment_count)
    else:
        prop = _SimulatedPropagator(field, start, segment_count, opts or IntegratorOptions())
    land_tol = 1e-12 * max(1.0, float(np.hypot(*(goal - start))))

    shape = np.array(init.headings)
    landed = _land(prop, goal, shape, 0.0, init.total_time, land_tol)
    if landed is None:
        raise NoConvergence("initial schedule cannot be steered onto the goal")
    phi, T = landed
    shape += phi
    phi = 0.0
    width = np.full(segment_count, 0.05)

    for _ in range(max_sweeps):
        T_sweep = T
        for k in range(segment_count):
            base = shape[k]
            memo = {}

            def f(v):
                trial = shape.copy()
                trial[k] = v
                res = _land(prop, goal, trial, phi, T, land_tol)
                if res is None:
                    return math.inf
                memo[v] = res
                return res[1]

            v, fv = golden_section(f, base - width[k], base + width[k], 1e-3 * width[k])
            if fv < T:
                shape[k] = v
                phi, T = memo[v]
                width[k] = min(0.5, max(2.0 * abs(v - base), 1e-5))
            else:
                width[k] = max(0.5 * width[k], 1e-5)
        shape += phi
        phi = 0.0
        if T_sweep - T < tol:
            return HeadingSchedule(T, shape), T
    raise NoConvergence(f"heading optimisation did not settle within {max_sweeps} sweeps")
