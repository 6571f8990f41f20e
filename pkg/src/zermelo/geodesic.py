"""Time-parameterised optimal trajectories from the geodesic spray.

Geodesics are integrated at unit Randers speed, F(x, x') = 1, so the curve
parameter is elapsed travel time and the geodesic equation reduces to
``x'' = -2 G(x, x')``.  The state vector is ``(x1, x2, y1, y2)`` with
``y = x'`` the ground velocity.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .affine_spray import affine_constants, affine_polynomials, spray_from_polynomials
from .errors import DomainExit, NotOnIndicatrix, ParseError
from .integrate import DormandPrince, bisect_root
from .randers import _randers_norm, metric_value, zeta_from_parts
from .wind import AffineWind, WindField

CSV_HEADER = ("t", "x1", "x2", "y1", "y2", "F", "theta")
TERMINAL_REASONS = ("time_limit", "domain_exit", "goal_event")


@dataclass(frozen=True)
class GeodesicState:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(2))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(2))


@dataclass(frozen=True)
class Trajectory:
    """Sampled path; row ``k`` of each array belongs to time ``t[k]``.

    ``theta`` is the steering heading, unwrapped into a continuous signal.
    """

    t: np.ndarray
    x: np.ndarray          # (n, 2)
    y: np.ndarray          # (n, 2)
    F: np.ndarray
    theta: np.ndarray
    terminal_reason: str = "time_limit"
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.t)

    def samples(self) -> Iterator[tuple[float, GeodesicState, float, float]]:
        for k in range(len(self.t)):
            yield float(self.t[k]), GeodesicState(self.x[k], self.y[k]), float(self.F[k]), float(self.theta[k])

    @property
    def end(self) -> GeodesicState:
        return GeodesicState(self.x[-1], self.y[-1])

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    def max_speed_error(self) -> float:
        return float(np.max(np.abs(self.F - 1.0)))

    def to_rows(self):
        return np.column_stack([self.t, self.x, self.y, self.F, self.theta])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_HEADER) + "\n")
        for row in self.to_rows():
            buf.write(",".join(f"{v:.15g}" for v in row) + "\n")
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {"terminal_reason": self.terminal_reason,
                "columns": list(CSV_HEADER),
                "rows": [[float(f"{v:.15g}") for v in row] for row in self.to_rows()]}

    @classmethod
    def from_rows(cls, rows, terminal_reason="time_limit") -> "Trajectory":
        rows = np.asarray(rows, dtype=float).reshape(-1, len(CSV_HEADER))
        return cls(rows[:, 0], rows[:, 1:3], rows[:, 3:5], rows[:, 5], rows[:, 6], terminal_reason)

    @classmethod
    def read(cls, path) -> "Trajectory":
        """Load a trajectory written as CSV or JSON."""
        text = Path(path).read_text(encoding="utf-8")
        try:
            if text.lstrip().startswith("{"):
                doc = json.loads(text)
                if "trajectory" in doc:
                    doc = doc["trajectory"]
                return cls.from_rows(doc["rows"], doc.get("terminal_reason", "time_limit"))
            reader = csv.reader(io.StringIO(text))
            header = tuple(next(reader))
            if header != CSV_HEADER:
                raise ParseError(f"unexpected trajectory header {header}")
            return cls.from_rows([[float(v) for v in r] for r in reader if r])
        except (KeyError, ValueError, StopIteration, json.JSONDecodeError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed trajectory file: {exc}") from exc


def unit_initial_velocity(field: WindField, x0, theta: float) -> np.ndarray:
    return field.value(x0) + np.array([math.cos(theta), math.sin(theta)])


def spray_function(field: WindField):
    """Unchecked spray ``G(x, y)`` for the integrator: the closed form for
    affine winds, the general formula otherwise."""
    if isinstance(field, AffineWind) and not np.any(field.A):
        # constant wind: every tensor built from derivatives vanishes
        def spray(x, y):
            return np.zeros_like(y)
    elif isinstance(field, AffineWind):
        k = affine_constants(field)
        c, A = field.c, field.A

        def spray(x, y):
            w1 = c[0] + A[0, 0] * x[0] + A[0, 1] * x[1]
            w2 = c[1] + A[1, 0] * x[0] + A[1, 1] * x[1]
            F = _randers_norm((w1, w2), y)
            return spray_from_polynomials(affine_polynomials(k, x), F, y)
    else:
        def spray(x, y):
            return zeta_from_parts(field.value(x, check=False), field.jacobian(x, check=False), y)
    return spray


def flow_function(field: WindField):
    spray = spray_function(field)

    def rhs(t, s):
        return np.concatenate([s[2:4], -2.0 * spray(s[0:2], s[2:4])])
    return rhs


def geodesic_rhs(field: WindField, state: GeodesicState):
    """``(dx, dy) = (y, -2 G(x, y))``."""
    field.value(state.x)      # domain check
    spray = spray_function(field)
    return state.y.copy(), -2.0 * np.asarray(spray(state.x, state.y), dtype=float)


def recover_heading(field: WindField, state: GeodesicState, tol: float = 1e-6) -> float:
    u = state.y - field.value(state.x)
    norm = math.hypot(u[0], u[1])
    if abs(norm - 1.0) > tol:
        raise NotOnIndicatrix(f"|y - w(x)| = {norm:.12g} differs from 1 by more than {tol:g}")
    return math.atan2(u[1], u[0])


def headings(field: WindField, x, y) -> np.ndarray:
    """Unwrapped steering angles for rows of positions/velocities."""
    w = field.value(np.asarray(x).T, check=False).T
    u = np.asarray(y) - w
    return np.unwrap(np.arctan2(u[:, 1], u[:, 0]))


def speeds(field: WindField, x, y) -> np.ndarray:
    w = field.value(np.asarray(x).T, check=False)
    return metric_value(w, np.asarray(y).T)


def make_trajectory(field: WindField, t, states, reason, meta=None) -> Trajectory:
    states = np.asarray(states, dtype=float)
    x, y = states[:, :2], states[:, 2:]
    return Trajectory(np.asarray(t, dtype=float), x, y, speeds(field, x, y),
                      headings(field, x, y), reason, meta or {})


@dataclass
class IntegratorOptions:
    rtol: float = 1e-10
    atol: float = 1e-10
    first_step: float = 1e-3
    max_step: float = 0.1


def _closest_in_step(solver, goal, t_lo, t_hi):
    """Local minimum of |x - goal| strictly inside ``(t_lo, t_hi]`` or None."""
    def approach(t):
        s = solver.dense(t)
        return (s[0] - goal[0]) * s[2] + (s[1] - goal[1]) * s[3]

    if not (approach(t_lo) < 0.0 <= approach(t_hi)):
        return None
    hi, lo = bisect_root(approach, t_lo, t_hi)
    return float(0.5 * (hi + lo))


def integrate_geodesic(field: WindField, x0, theta0: float, t_max: float, *,
                       opts: IntegratorOptions | None = None, stride: float | None = None,
                       goal=None, goal_radius: float | None = None,
                       raise_on_exit: bool = False) -> Trajectory:
    """Integrate the unit-speed geodesic leaving ``x0`` with steering heading ``theta0``.

    Parameters
    ----------
    stride : float, optional
        Sample spacing in time (samples come from the continuous extension).
        By default every accepted step is recorded.
    goal, goal_radius : optional
        Stop at the first closest approach to ``goal`` that comes within
        ``goal_radius``; the trajectory then ends with ``goal_event``.
    raise_on_exit : bool
        Raise ``DomainExit`` (carrying the truncated trajectory) instead of
        returning it with ``terminal_reason == "domain_exit"``.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    opts = opts or IntegratorOptions()
    x0 = np.asarray(x0, dtype=float).reshape(2)
    y0 = unit_initial_velocity(field, x0, theta0)
    solver = DormandPrince(flow_function(field), 0.0, np.concatenate([x0, y0]), t_max,
                           opts.rtol, opts.atol, opts.first_step, opts.max_step)
    if goal is not None:
        goal = np.asarray(goal, dtype=float).reshape(2)
        if goal_radius is None:
            raise ValueError("goal_radius is required with goal")
    domain = field.domain
    times, states = [0.0], [solver.y.copy()]
    next_sample = stride
    reason = "time_limit"
    while not solver.done:
        solver.step()
        t_end = solver.t
        if not domain.contains(solver.y[:2]):
            hi, lo = bisect_root(lambda t: domain.outside_distance(solver.dense(t)[:2]),
                                 solver.t_old, solver.t)
            t_end = float(lo)
            reason = "domain_exit"
        if goal is not None:
            tc = _closest_in_step(solver, goal, solver.t_old, t_end)
            if tc is not None:
                s = solver.dense(tc)
                if math.hypot(s[0] - goal[0], s[1] - goal[1]) <= goal_radius:
                    t_end = tc
                    reason = "goal_event"
        if stride is not None:
            while next_sample < t_end - 1e-12 * max(1.0, t_end):
                times.append(next_sample)
                states.append(solver.dense(next_sample))
                next_sample += stride
            times.append(t_end)
            states.append(solver.dense(t_end) if t_end != solver.t else solver.y.copy())
            if reason == "time_limit" and not solver.done:
                times.pop()
                states.pop()
        else:
            times.append(t_end)
            states.append(solver.dense(t_end) if t_end != solver.t else solver.y.copy())
        if reason != "time_limit":
            break
    traj = make_trajectory(field, times, states, reason,
                           {"steps": solver.n_steps, "evaluations": solver.n_evals})
    if reason == "domain_exit" and raise_on_exit:
        raise DomainExit(traj)
    return traj
