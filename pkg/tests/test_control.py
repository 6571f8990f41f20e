import math

import numpy as np
import pytest

from zermelo.checks import random_weak_affine
from zermelo.control import (HeadingSchedule, crab_schedule, golden_section, optimize_headings,
                             simulate_control)
from zermelo.errors import DomainExit, NoConvergence
from zermelo.fixtures import load_fixture
from zermelo.geodesic import integrate_geodesic
from zermelo.navigator import NavigationProblem, solve_navigation
from zermelo.wind import AffineWind, AnalyticWind, Domain

BOX = Domain(-5.0, 5.0, -5.0, 5.0)


def test_schedule_validation_and_refinement():
    with pytest.raises(ValueError):
        HeadingSchedule(0.0, [0.0])
    with pytest.raises(ValueError):
        HeadingSchedule(1.0, [])
    with pytest.raises(ValueError):
        HeadingSchedule(1.0, [math.nan])
    s = HeadingSchedule(2.0, [0.1, 0.2])
    assert s.segment_count == 2 and s.segment_duration == 1.0
    assert s.heading_at(1.5) == 0.2 and s.heading_at(2.0) == 0.2
    assert s.refined().headings == (0.1, 0.1, 0.2, 0.2)


def test_simulate_trivial_cases():
    t = simulate_control(AffineWind.constant((0, 0), BOX), (0, 0), HeadingSchedule(1.0, [0.0]))
    assert np.allclose(t.x[-1], (1, 0), atol=1e-12)
    t = simulate_control(AffineWind.constant((0.3, 0), BOX), (0, 0), HeadingSchedule(1.0, [0.0]))
    assert np.allclose(t.x[-1], (1.3, 0), atol=1e-12)
    assert np.allclose(t.F, 1.0, atol=1e-12) and np.all(t.theta == 0.0)


def test_simulate_records_applied_heading():
    t = simulate_control(AffineWind.constant((0, 0), BOX), (0, 0), HeadingSchedule(2.0, [0.0, math.pi / 2]))
    assert np.allclose(t.x[-1], (1, 1), atol=1e-12)
    assert set(np.round(t.theta, 12)) == {0.0, round(math.pi / 2, 12)}


def test_simulate_domain_exit():
    f = AffineWind.constant((0, 0), Domain(-1, 1, -1, 1))
    t = simulate_control(f, (0, 0), HeadingSchedule(3.0, [0.0]))
    assert t.terminal_reason == "domain_exit" and t.x[-1, 0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainExit):
        simulate_control(f, (0, 0), HeadingSchedule(3.0, [0.0]), raise_on_exit=True)


def test_geodesic_is_a_realisable_control():
    f = load_fixture("generic_affine")
    geo = integrate_geodesic(f, (0.1, 0.2), 0.5, 1.0)
    n = 64
    mids = (np.arange(n) + 0.5) / n
    sched = HeadingSchedule(1.0, np.interp(mids, geo.t, geo.theta))
    end = simulate_control(f, (0.1, 0.2), sched).x[-1]
    assert np.max(np.abs(end - geo.x[-1])) <= 1e-4


def test_golden_section_parabola():
    x, fx = golden_section(lambda v: (v - 0.3) ** 2, -1.0, 1.0, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-7) and fx <= 1e-14


def test_crab_schedule_constant_wind_is_exact():
    s = crab_schedule(AffineWind.constant((0, 0.5), BOX), (0, 0), (1, 0), 4)
    assert s.total_time == pytest.approx(2 / math.sqrt(3), rel=1e-12)
    assert np.allclose(s.headings, -math.pi / 6, atol=1e-12)


def test_crosswind_single_segment():
    s, t = optimize_headings(AffineWind.constant((0, 0.5), BOX), (0, 0), (1, 0), 1)
    assert s.headings[0] == pytest.approx(-math.pi / 6, abs=1e-3)
    assert t == pytest.approx(1.1547, abs=1e-3)


def test_zero_wind_all_headings_equal():
    s, t = optimize_headings(AffineWind.constant((0, 0), BOX), (0, 0), (3, 4), 8)
    assert t == pytest.approx(5.0, abs=1e-6)
    assert np.ptp(s.headings) <= 1e-9


def test_endpoint_lands_on_goal():
    f = load_fixture("generic_affine")
    s, t = optimize_headings(f, (0.1, 0.2), (0.9, 0.7), 8)
    assert s.total_time == t
    assert np.allclose(simulate_control(f, (0.1, 0.2), s).x[-1], (0.9, 0.7), atol=1e-8)


def test_general_fields_use_simulation_and_agree():
    f = load_fixture("generic_affine")
    g = AnalyticWind(lambda x: f.value(x, check=False), f.domain, jac=lambda x: f.jacobian(x, check=False))
    _, t_exact = optimize_headings(f, (0.1, 0.2), (0.9, 0.7), 2)
    _, t_sim = optimize_headings(g, (0.1, 0.2), (0.9, 0.7), 2)
    assert t_sim == pytest.approx(t_exact, abs=1e-8)


def test_refinement_never_costs_more_than_tol():
    f = load_fixture("rotation")
    tol = 1e-9
    prev = None
    for n in (4, 8, 16):
        s, t = optimize_headings(f, (-2, -1), (2, 1.5), n, tol=tol,
                                 init=None if prev is None else prev[0].refined())
        if prev is not None:
            assert t <= prev[1] + tol
        prev = (s, t)


def test_dominance_and_agreement_on_random_fields():
    rng = np.random.default_rng(7)
    for _ in range(3):
        f = random_weak_affine(rng)
        s, g = rng.uniform(0.1, 0.9, 2), rng.uniform(0.1, 0.9, 2)
        geo = solve_navigation(NavigationProblem(f, s, g)).time
        _, ctl = optimize_headings(f, s, g, 32)
        assert ctl >= geo - 1e-6
        assert abs(ctl - geo) <= 0.01 * geo


def test_sweep_cap():
    f = load_fixture("generic_affine")
    with pytest.raises(NoConvergence):
        optimize_headings(f, (0.1, 0.2), (0.9, 0.7), 16, tol=0.0, max_sweeps=1)


def test_init_length_mismatch():
    with pytest.raises(ValueError):
        optimize_headings(load_fixture("zero"), (0, 0), (1, 0), 4, init=HeadingSchedule(1.0, [0.0]))
