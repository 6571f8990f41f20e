"""Bundled reference winds and start/goal pairs with known behaviour."""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .wind import WindField, load_wind_spec

FIELD_NAMES = ("zero", "const_downwind", "const_cross", "rotation", "generic_affine")


@dataclass(frozen=True)
class FixtureProblem:
    name: str
    field_name: str
    start: tuple
    goal: tuple
    expected_time: float | None = None      # closed form where one exists


PROBLEMS = (
    FixtureProblem("zero", "zero", (0.0, 0.0), (3.0, 4.0), 5.0),
    FixtureProblem("downwind", "const_downwind", (0.0, 0.0), (1.0, 0.0), 1.0 / 1.3),
    FixtureProblem("upwind", "const_downwind", (1.0, 0.0), (0.0, 0.0), 1.0 / 0.7),
    FixtureProblem("crosswind", "const_cross", (0.0, 0.0), (1.0, 0.0), 2.0 / math.sqrt(3.0)),
    FixtureProblem("rotation", "rotation", (-2.0, -1.0), (2.0, 1.5)),
    FixtureProblem("generic_affine", "generic_affine", (0.1, 0.2), (0.9, 0.7)),
)


def fixture_text(name: str) -> str:
    if name not in FIELD_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIELD_NAMES)}")
    return resources.files(__package__).joinpath("data").joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str) -> WindField:
    return load_wind_spec(fixture_text(name))


def fixture_problem(name: str) -> FixtureProblem:
    for p in PROBLEMS:
        if p.name == name:
            return p
    raise KeyError(f"unknown fixture problem {name!r}")


def problem_arrays(p: FixtureProblem):
    """``(field, start, goal)`` ready for the solvers."""
    return load_fixture(p.field_name), np.array(p.start), np.array(p.goal)
