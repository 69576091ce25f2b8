import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from systolic.hypmath import (
    TRIG,
    HyperbolicDomainError,
    Isometry,
    IsometryType,
    axis_distance,
    collar_half_width,
    cusped_pants_self_perp,
    ideal_trirectangle_side,
    length_from_trace,
    mat_inv,
    mat_mul,
    pants_perp,
    rotation,
    trace_from_length,
    translation,
    translation_length,
)
from systolic.surface import _to_float, pants_group

ASINH1 = math.asinh(1.0)


def test_length_from_trace_examples():
    assert translation_length((3.0, 4.0, 2.0, 3.0)) == pytest.approx(3.5254943481, abs=1e-10)
    assert length_from_trace(6.0) == pytest.approx(4 * ASINH1, abs=1e-14)
    assert translation_length((1.0, 1.0, 0.0, 1.0)) == 0.0
    assert length_from_trace(2 * math.cosh(0.5)) == pytest.approx(1.0, abs=1e-14)
    assert trace_from_length(1.0) == pytest.approx(2 * math.cosh(0.5))


def test_elliptic_has_no_translation_length():
    with pytest.raises(HyperbolicDomainError):
        translation_length(rotation(0.3))


def test_classification():
    assert Isometry.identity().classify() is IsometryType.IDENTITY
    assert Isometry(*rotation(1.0)).classify() is IsometryType.ELLIPTIC
    assert Isometry(1.0, 2.0, 0.0, 1.0).classify() is IsometryType.PARABOLIC
    assert Isometry(*translation(0.7)).classify() is IsometryType.HYPERBOLIC


def test_isometry_renormalizes_and_rejects_bad_determinant():
    m = Isometry(2.0, 0.0, 0.0, 2.0)
    assert m.a * m.d - m.b * m.c == pytest.approx(1.0)
    with pytest.raises(HyperbolicDomainError):
        Isometry(0.0, 1.0, 1.0, 0.0)


def test_pants_perp_equilateral():
    d = pants_perp(TRIG.boundary, TRIG.boundary, TRIG.boundary)
    assert d == pytest.approx(0.9624236501, abs=1e-10)
    assert abs(d - math.acosh(1.5)) <= 1e-12
    assert abs(d - 2 * math.asinh(0.5)) <= 1e-12
    assert abs(d - TRIG.dmin) <= 1e-12


def test_pants_perp_with_cusp():
    assert pants_perp(TRIG.boundary, TRIG.boundary, 0.0) == pytest.approx(math.acosh(1.25), abs=1e-12)


def test_pants_perp_matches_holonomy():
    l = TRIG.boundary
    c0, c1, _ = [_to_float(m) for m in pants_group(l, l, 0.0).boundary]
    assert axis_distance(c0, c1) == pytest.approx(math.acosh(1.25), abs=1e-9)


def test_pants_perp_domain():
    with pytest.raises(HyperbolicDomainError):
        pants_perp(0.0, 1.0, 1.0)
    with pytest.raises(HyperbolicDomainError):
        pants_perp(1.0, 1.0, -1.0)


@given(st.floats(0.05, 8), st.floats(0.05, 8), st.floats(0, 8))
def test_pants_perp_symmetric(a, b, c):
    assert pants_perp(a, b, c) == pytest.approx(pants_perp(b, a, c), rel=1e-14)


def test_cusped_self_perp():
    assert cusped_pants_self_perp(TRIG.boundary) == pytest.approx(1.7627471740, abs=1e-10)
    assert abs(cusped_pants_self_perp(TRIG.boundary) - 2 * ASINH1) <= 1e-12
    assert cusped_pants_self_perp(0.01) > 10
    assert cusped_pants_self_perp(1.0) > cusped_pants_self_perp(2.0) > cusped_pants_self_perp(4.0)


@pytest.mark.parametrize("l1", [2.0, TRIG.boundary, 0.6])
def test_cusped_self_perp_matches_holonomy(l1):
    c0, c1, c2 = [_to_float(m) for m in pants_group(l1, 0.0, 0.0).boundary]
    for p in (c1, c2):
        image = mat_mul(mat_mul(p, c0), mat_inv(p))
        assert axis_distance(c0, image) == pytest.approx(cusped_pants_self_perp(l1), abs=1e-9)


def test_ideal_trirectangle():
    assert ideal_trirectangle_side(ASINH1) == pytest.approx(ASINH1, abs=1e-14)
    assert 2 * ideal_trirectangle_side(ASINH1) == pytest.approx(TRIG.side, abs=1e-14)
    assert ideal_trirectangle_side(math.asinh(2.0)) == pytest.approx(math.asinh(0.5), abs=1e-14)
    with pytest.raises(HyperbolicDomainError):
        ideal_trirectangle_side(0.0)


@given(st.floats(0.1, 3))
def test_ideal_trirectangle_involution(a):
    assert ideal_trirectangle_side(ideal_trirectangle_side(a)) == pytest.approx(a, abs=1e-12)


def test_collar():
    assert collar_half_width(2 * ASINH1) == pytest.approx(0.8813735870, abs=1e-10)
    assert collar_half_width(10.0) < 0.02
    assert collar_half_width(10.0) == pytest.approx(0.0135, abs=1e-4)
    assert collar_half_width(1.0) > collar_half_width(2.0) > collar_half_width(4.0)
    with pytest.raises(HyperbolicDomainError):
        collar_half_width(0.0)


def test_axis_distance_oracle():
    # axis of k t(b) k^-1 is the image of the imaginary axis under a
    # translation by d along the geodesic perpendicular to it at i
    for d in (0.3, 1.0, 2.5):
        r = rotation(math.pi / 2)
        k = mat_mul(mat_mul(r, translation(d)), mat_inv(r))
        n = mat_mul(mat_mul(k, translation(1.3)), mat_inv(k))
        assert axis_distance(translation(0.8), n) == pytest.approx(d, abs=1e-9)


def test_constants():
    assert TRIG.boundary == pytest.approx(3.5254943481, abs=1e-10)
    assert TRIG.side == pytest.approx(1.7627471740, abs=1e-10)
    assert TRIG.transversal - TRIG.boundary == pytest.approx(0.3242002524, abs=1e-9)


hyperbolic = st.tuples(st.floats(0.1, 5), st.floats(-3, 3)).map(
    lambda t: mat_mul(mat_mul(rotation(t[1]), translation(t[0])), mat_inv(rotation(t[1])))
)
conjugator = st.tuples(st.floats(-3, 3), st.floats(-2, 2), st.floats(-3, 3)).map(
    lambda t: mat_mul(mat_mul(rotation(t[0]), translation(t[1])), rotation(t[2]))
)


@settings(max_examples=200)
@given(hyperbolic, conjugator)
def test_conjugation_invariance(g, h):
    conj = mat_mul(mat_mul(h, g), mat_inv(h))
    assert abs(translation_length(conj) - translation_length(g)) <= 1e-9


@given(hyperbolic)
def test_inverse_invariance(g):
    assert translation_length(mat_inv(g)) == translation_length(g)
