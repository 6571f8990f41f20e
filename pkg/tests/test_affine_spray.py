import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from zermelo.affine_spray import affine_constants, affine_polynomials, affine_spray_eval
from zermelo.randers import contract, metric_value, navigation_tensors, zeta_spray
from zermelo.wind import AffineWind, Domain

SQUARE = Domain(-1.0, 1.0, -1.0, 1.0)
small = st.floats(-0.25, 0.25)
affine = st.builds(lambda c1, c2, a1, b1, a2, b2: AffineWind((c1, c2), [[a1, b1], [a2, b2]], SQUARE),
                   small, small, small, small, small, small)

DEGREES = {"P11": 2, "P12": 2, "L11": 1, "L12": 1, "Q01": 1, "R01": 3,
           "P21": 2, "P22": 2, "L21": 1, "L22": 1, "Q02": 1, "R02": 3}


def test_constants_zero_field():
    k = affine_constants(AffineWind.constant((0, 0), SQUARE))
    assert all(v == 0 for v in k.as_dict().values())


def test_constants_rotation():
    k = affine_constants(AffineWind((0, 0), [[0, 0.1], [-0.1, 0]], SQUARE))
    assert k.N == pytest.approx(0.2)
    assert k.A3 == pytest.approx(0.02) and k.B4 == pytest.approx(0.02)
    assert k.E == k.J == k.K == 0
    assert k.A5 == k.B5 == k.A6 == k.B6 == 0
    assert k.M00 == k.M10 == k.M01 == k.M20 == k.M11 == k.M02 == 0


def test_constants_generic_A3():
    k = affine_constants(AffineWind((0.1, -0.05), [[0.1, 0.05], [-0.02, 0.03]], SQUARE))
    assert k.A3 == pytest.approx(0.0208, rel=1e-14)


def test_polynomials_zero_constants():
    k = affine_constants(AffineWind.constant((0, 0), SQUARE))
    p = affine_polynomials(k, np.array([0.3, -0.4]))
    assert all(np.all(np.asarray(v) == 0) for v in p.as_dict().values())


def test_spray_zero_wind():
    assert np.array_equal(affine_spray_eval(AffineWind.constant((0, 0), SQUARE), (0.5, 0.5), (1, 2)), [0, 0])


@settings(max_examples=150, deadline=None)
@given(affine, st.floats(-1, 1), st.floats(-1, 1), st.floats(-3, 3), st.floats(-3, 3))
def test_closed_form_equals_general_spray(f, x1, x2, y1, y2):
    assume(math.hypot(y1, y2) > 1e-3)
    x, y = np.array([x1, x2]), np.array([y1, y2])
    z = zeta_spray(f, x, y)
    a = affine_spray_eval(f, x, y)
    assert np.linalg.norm(a - z) <= 1e-9 * max(np.linalg.norm(z), 1e-300) or np.linalg.norm(a - z) <= 1e-15


@settings(max_examples=100, deadline=None)
@given(affine, st.floats(-1, 1), st.floats(-1, 1), st.floats(-3, 3), st.floats(-3, 3))
def test_ledger_matches_tensor_contractions(f, x1, x2, y1, y2):
    x, y = np.array([x1, x2]), np.array([y1, y2])
    k = affine_constants(f)
    w = f.value(x)
    t = navigation_tensors(w, f.jacobian(x))
    c = contract(t, w, y)
    s1 = k.A5 * x1 + k.B5 * x2 + k.C5
    s2 = k.A6 * x1 + k.B6 * x2 + k.C6
    assert s1 * y1 + s2 * y2 == pytest.approx(c.S0, abs=1e-13)
    assert k.lww(x1, x2) == pytest.approx(c.Lww, abs=1e-13)
    st_ = [k.A3 * x1 + k.B3 * x2 + k.C3, k.A4 * x1 + k.B4 * x2 + k.C4]
    assert np.allclose(st_, t.S + t.T, atol=1e-13)
    assert k.A4 == k.B3
    assert c.L00 == pytest.approx(k.E * y1 * y1 + k.J * y1 * y2 + k.K * y2 * y2, abs=1e-13)
    assert np.allclose(c.C0, [k.N * y2, -k.N * y1], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(affine, st.integers(0, 2 ** 32 - 1))
def test_polynomial_degrees(f, seed):
    rng = np.random.default_rng(seed)
    k = affine_constants(f)
    x0, d = rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.1, 0.1, 2)
    ts = np.arange(5.0)
    vals = affine_polynomials(k, x0[:, None] + np.outer(d, ts)).as_dict()
    for name, deg in DEGREES.items():
        series = np.asarray(vals[name], dtype=float)
        scale = max(1e-12, float(np.max(np.abs(series))))
        assert np.max(np.abs(np.diff(series, n=deg + 1))) <= 1e-12 * scale * 2 ** (deg + 1)
    for name in ("A01", "B01", "D01", "A02", "B02", "D02"):
        assert np.ndim(vals[name]) == 0


def test_rotation_spray_reduces_to_killing_form():
    omega = 0.1
    f = AffineWind((0, 0), [[0, omega], [-omega, 0]], SQUARE)
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, y = rng.uniform(-1, 1, 2), rng.normal(size=2)
        w = f.value(x)
        t = navigation_tensors(w, f.jacobian(x))
        F = metric_value(w, y)
        expected = -0.25 * F * F * (t.S + t.T) - 0.5 * F * (t.C @ y)
        assert np.allclose(affine_spray_eval(f, x, y), expected, rtol=1e-12, atol=1e-16)


def test_batched_evaluation():
    f = AffineWind((0.1, -0.05), [[0.1, 0.05], [-0.02, 0.03]], SQUARE)
    rng = np.random.default_rng(4)
    x, y = rng.uniform(-1, 1, (2, 9)), rng.normal(size=(2, 9))
    assert np.allclose(affine_spray_eval(f, x, y), zeta_spray(f, x, y), rtol=1e-12, atol=1e-16)
