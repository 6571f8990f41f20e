import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zermelo.errors import FieldNotWeak, ParseError, PointOutsideDomain
from zermelo.wind import (AffineWind, AnalyticWind, Domain, GridWind, affine_fit, dump_wind_spec,
                          eval_wind, jacobian_wind, load_wind_spec, validate_weak)

SQUARE = Domain(-1.0, 1.0, -1.0, 1.0)
coef = st.floats(-0.2, 0.2)


def rotation(omega=0.1, domain=SQUARE):
    return AffineWind((0.0, 0.0), [[0.0, omega], [-omega, 0.0]], domain)


def central_jacobian(field, x, h=1e-6):
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        J[:, j] = (field.value(x + e) - field.value(x - e)) / (2 * h)
    return J


def test_eval_constant():
    f = AffineWind.constant((0.1, 0.0), Domain(0, 10, 0, 10))
    assert np.allclose(eval_wind(f, (5.0, 5.0)), (0.1, 0.0), rtol=0, atol=1e-15)


def test_eval_rotation_substitution():
    assert np.allclose(eval_wind(rotation(domain=Domain(-3, 3, -3, 3)), (1.0, 2.0)), (0.2, -0.1), atol=1e-15)


def test_eval_grid_cell_center():
    g = GridWind((0.0, 0.0), (1.0, 1.0), [[0.0, 1.0], [0.0, 1.0]], np.zeros((2, 2)))
    assert eval_wind(g, (0.5, 0.5))[0] == pytest.approx(0.5, abs=1e-15)


def test_eval_batch_shape():
    pts = np.zeros((2, 3, 4))
    assert rotation().value(pts).shape == (2, 3, 4)
    assert rotation().jacobian(pts).shape == (2, 2, 3, 4)


def test_eval_outside_domain():
    with pytest.raises(PointOutsideDomain):
        eval_wind(rotation(), (2.0, 0.0))


def test_jacobian_affine_and_zero():
    A = [[0.1, 0.05], [-0.02, 0.03]]
    f = AffineWind((0.1, -0.05), A, SQUARE)
    assert np.array_equal(jacobian_wind(f, (0.3, -0.2)), np.array(A))
    z = AffineWind.constant((0.0, 0.0), SQUARE)
    assert np.array_equal(jacobian_wind(z, (0.3, -0.2)), np.zeros((2, 2)))


def test_grid_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    g = GridWind((0.0, 0.0), (0.25, 0.5), rng.uniform(-0.3, 0.3, (5, 6)), rng.uniform(-0.3, 0.3, (5, 6)))
    # stay off cell edges, where the bilinear Jacobian jumps
    for x in [(0.1, 0.2), (0.6, 1.3), (1.1, 1.9)]:
        x = np.array(x)
        assert np.allclose(jacobian_wind(g, x), central_jacobian(g, x), rtol=0, atol=1e-8)


def test_grid_edge_uses_lower_left_cell():
    u = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    g = GridWind((0.0, 0.0), (1.0, 1.0), u, np.zeros_like(u))
    # x1 = 1 is an interior edge: lower-left cell [0,1] has du/dx1 = +1 at x2 = 1
    assert jacobian_wind(g, (1.0, 1.0))[0, 0] == pytest.approx(1.0)
    assert jacobian_wind(g, (1.5, 1.0))[0, 0] == pytest.approx(-1.0)


def test_analytic_jacobian_finite_difference_default():
    f = AnalyticWind(lambda x: np.array([0.1 * np.sin(x[0]), 0.1 * x[0] * x[1]]), SQUARE)
    x = np.array([0.3, -0.4])
    exact = np.array([[0.1 * math.cos(0.3), 0.0], [0.1 * -0.4, 0.1 * 0.3]])
    assert np.allclose(jacobian_wind(f, x), exact, rtol=1e-6, atol=1e-9)


def test_validate_constant_passes():
    r = validate_weak(AffineWind.constant((0.5, 0.0), SQUARE), margin=0.99)
    assert r.max_norm == pytest.approx(0.5) and r.passed


def test_validate_strong_corner_fails():
    f = AffineWind((0.0, 0.0), [[1.0, 0.0], [0.0, 0.0]], Domain(0, 2, 0, 1))
    r = validate_weak(f, strict=False)
    assert r.max_norm == pytest.approx(2.0) and r.location[0] == 2.0 and not r.passed
    with pytest.raises(FieldNotWeak):
        validate_weak(f)


def test_validate_rotation():
    r = validate_weak(rotation())
    assert r.max_norm == pytest.approx(0.1 * math.sqrt(2), abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(coef, coef, coef, coef, coef, coef, st.integers(0, 2 ** 32 - 1))
def test_validated_affine_bounded_everywhere(c1, c2, a1, b1, a2, b2, seed):
    f = AffineWind((c1, c2), [[a1, b1], [a2, b2]], SQUARE)
    r = validate_weak(f, strict=False)
    pts = np.random.default_rng(seed).uniform(-1, 1, (2, 500))
    assert np.max(np.hypot(*f.value(pts))) <= r.max_norm + 1e-15


@settings(max_examples=30, deadline=None)
@given(coef, coef, coef, coef, coef, coef)
def test_affine_jacobian_matches_finite_differences(c1, c2, a1, b1, a2, b2):
    f = AffineWind((c1, c2), [[a1, b1], [a2, b2]], SQUARE)
    x = np.array([0.2, -0.3])
    assert np.allclose(f.jacobian(x), central_jacobian(f, x), rtol=1e-6, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(coef, coef, coef, coef, coef, coef)
def test_affine_fit_is_exact_projection(c1, c2, a1, b1, a2, b2):
    f = AffineWind((c1, c2), [[a1, b1], [a2, b2]], SQUARE)
    g, resid = affine_fit(f, Domain(-0.5, 0.5, 0.0, 1.0))
    assert resid <= 1e-12
    assert np.allclose(g.c, f.c, rtol=0, atol=1e-12)
    assert np.allclose(g.A, f.A, rtol=0, atol=1e-12)


def test_affine_fit_constant():
    g, resid = affine_fit(AffineWind.constant((0.2, -0.1), SQUARE), SQUARE)
    assert np.allclose(g.c, (0.2, -0.1), atol=1e-14) and np.allclose(g.A, 0, atol=1e-14)


def test_affine_fit_sine_taylor():
    f = AnalyticWind(lambda x: np.array([np.sin(x[0]), 0.0 * x[0]]), Domain(-0.1, 0.1, -0.1, 0.1))
    g, resid = affine_fit(f, f.domain)
    assert abs(g.A[0, 0] - 1.0) <= 1e-2
    assert resid <= 1e-4


def test_affine_fit_rect_must_lie_inside():
    with pytest.raises(PointOutsideDomain):
        affine_fit(rotation(), Domain(0.0, 2.0, 0.0, 1.0))


def test_load_spec_roundtrip(tmp_path):
    f = AffineWind((0.1, -0.05), [[0.1, 0.05], [-0.02, 0.03]], Domain(-1, 2, -1, 2))
    path = tmp_path / "w.json"
    path.write_text(dump_wind_spec(f))
    g = load_wind_spec(path)
    assert np.array_equal(g.c, f.c) and np.array_equal(g.A, f.A) and g.domain == f.domain


def test_load_spec_grid_text():
    doc = {"type": "grid", "origin": [0, 0], "spacing": [1, 1], "u": [[0, 0.1], [0.1, 0.2]],
           "v": [[0, 0], [0, 0]]}
    g = load_wind_spec(json.dumps(doc))
    assert g.value((1.0, 1.0))[0] == pytest.approx(0.2)


def test_load_spec_strong_wind():
    doc = {"type": "affine", "c": [1.2, 0], "A": [[0, 0], [0, 0]], "domain": [-1, 1, -1, 1]}
    with pytest.raises(FieldNotWeak):
        load_wind_spec(json.dumps(doc))


@pytest.mark.parametrize("text", ["{not json", '{"type": "spiral"}', '{"type": "affine", "c": [0]}',
                                  '{"type": "affine", "c": [0, 0], "A": [[0, 0], [0, 0]], "domain": [1, 0, 0, 1]}'])
def test_load_spec_malformed(text):
    with pytest.raises(ParseError):
        load_wind_spec(text)
