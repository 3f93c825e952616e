import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatcone.errors import InvalidParameter
from heatcone.potentials import (chord_average, line_integral, make_bump,
                                 make_square_well, ray_support_window)

from oracles import BUMP_LINE_INTEGRAL, gl_line_integral


def test_square_well_values():
    v = make_square_well(1, 2.0, 1.0)
    assert v.evaluate(np.asarray(0.0)) == 2.0
    assert v.evaluate(np.asarray(1.5)) == 0.0
    assert v.evaluate(np.asarray(-0.999)) == 2.0


def test_square_well_3d_outside():
    v = make_square_well(3, 1.0, 1.0)
    assert v.evaluate(np.array([0.0, 0.0, 2.0])) == 0.0


def test_square_well_rejects_bad_parameters():
    with pytest.raises(InvalidParameter):
        make_square_well(1, -1.0, 1.0)
    with pytest.raises(InvalidParameter):
        make_square_well(1, 2.0, 0.0)


def test_bump_values():
    v = make_bump(1, 2.0, 1.0)
    assert v.evaluate(np.asarray(0.0)) == pytest.approx(2.0, abs=1e-15)
    assert v.evaluate(np.asarray(1.0)) == 0.0
    assert v.evaluate(np.asarray(1.0 + 1e-9)) == 0.0


def test_bump_killing_sign():
    v = make_bump(1, -1.0, 1.0)
    assert v.evaluate(np.asarray(0.0)) == pytest.approx(-1.0, abs=1e-15)
    assert v.min_value == -1.0
    assert v.max_value == 0.0


def test_bump_rejects_bad_radius():
    with pytest.raises(InvalidParameter):
        make_bump(1, 2.0, -1.0)


def test_line_integral_well():
    v = make_square_well(1, 2.0, 1.0)
    assert line_integral(v, [0.0], [1.0]) == pytest.approx(2.0, abs=1e-9)
    assert line_integral(v, [0.5], [1.0]) == pytest.approx(1.0, abs=1e-9)


def test_line_integral_bump_against_independent_quadrature():
    v = make_bump(1, 2.0, 1.0)
    got = line_integral(v, [0.0], [1.0], tol=1e-10)
    ref = gl_line_integral(lambda s: v.evaluate(np.asarray(s)), 0.0, 1.0, 1.0)
    assert got == pytest.approx(ref, abs=1e-9)
    assert got == pytest.approx(BUMP_LINE_INTEGRAL, abs=1e-9)


def test_compact_support_exact_zero():
    rng = np.random.default_rng(0)
    for v in (make_square_well(1, 2.0, 1.0), make_bump(1, 2.0, 1.0)):
        x = rng.uniform(1.0, 50.0, 10_000) * rng.choice([-1, 1], 10_000)
        assert np.all(v.evaluate(x) == 0.0)
    v3 = make_bump(3, 2.0, 1.0)
    pts = rng.standard_normal((10_000, 3))
    pts *= (rng.uniform(1.0, 30.0, 10_000) / np.linalg.norm(pts, axis=1))[:, None]
    assert np.all(v3.evaluate(pts) == 0.0)


def test_ray_missing_support_integrates_to_zero():
    v = make_bump(2, 2.0, 1.0)
    # ray from (0, 2) along +x stays at distance 2 from the origin
    assert line_integral(v, [0.0, 2.0], [1.0, 0.0]) == 0.0
    assert ray_support_window([0.0, 2.0], [1.0, 0.0], 1.0) is None


@settings(max_examples=50, deadline=None)
@given(c=st.floats(0.1, 3.0), y0=st.floats(-0.9, 0.9))
def test_line_integral_ray_additivity(c, y0):
    # integral from y equals integral from y - c*alpha plus the head segment
    from scipy.integrate import quad

    v = make_bump(1, 2.0, 1.0)
    alpha = np.array([1.0])
    full = line_integral(v, [y0 - c], alpha)
    head, _ = quad(lambda s: float(v.evaluate(np.asarray(y0 - c + s))), 0.0, c,
                   points=[w for w in (c - (y0 + 1.0), c - (y0 - 1.0))
                           if 0 < w < c] or None,
                   limit=200, epsabs=1e-12)
    tail = line_integral(v, [y0], alpha)
    assert full == pytest.approx(head + tail, abs=1e-8)


def test_chord_average_constant_inside_well():
    v = make_square_well(1, 2.0, 1.0)
    assert chord_average(v, np.asarray(0.0), np.asarray(0.5)) == pytest.approx(2.0)
