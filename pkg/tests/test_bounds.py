import math

import mpmath
import numpy as np
import pytest

from systolic.bounds import (
    MONOTONICITY_NOTE,
    closed_fallback_bound,
    hairy_torus_certificate,
    hom_sys_lower,
    minimal_m,
    minimal_m_sweep,
    proposition_check,
    schmutz_bound,
    square_side,
)
from systolic.hypmath import HyperbolicDomainError

ASINH1 = math.asinh(1.0)


def mp_bound(g, n):
    with mpmath.workdps(40):
        return float(4 * mpmath.acosh(mpmath.mpf(6 * g - 6 + 3 * n) / n))


def test_schmutz_examples():
    assert schmutz_bound(1, 25) == pytest.approx(7.0509886962, abs=1e-10)
    assert schmutz_bound(1, 25) == pytest.approx(8 * ASINH1, abs=1e-12)
    assert schmutz_bound(2, 50) == pytest.approx(mp_bound(2, 50), abs=1e-12)
    assert schmutz_bound(2, 50) == pytest.approx(7.2169925302, abs=1e-10)
    for n in (1, 7, 100, 10_000):
        assert schmutz_bound(1, n) == pytest.approx(8 * ASINH1, abs=1e-12)


def test_schmutz_domain():
    with pytest.raises(HyperbolicDomainError):
        schmutz_bound(2, 0)
    with pytest.raises(HyperbolicDomainError):
        closed_fallback_bound(1)
    assert closed_fallback_bound(2) == pytest.approx(2 * math.acosh(6))


def test_schmutz_monotone():
    for g in range(2, 6):
        values = [schmutz_bound(g, n) for n in range(25 * g, 250 * g + 1)]
        assert all(b < a for a, b in zip(values, values[1:]))
    for g in range(1, 8):
        for n in (1, 5, 30, 200):
            assert schmutz_bound(g, n) < schmutz_bound(g + 1, n)


def test_square_side_and_lower():
    assert square_side() == pytest.approx(2 * ASINH1, abs=1e-15)
    for m in range(1, 12):
        assert hom_sys_lower(m) == m * square_side()


def test_certificates():
    c = hairy_torus_certificate(1, 5)
    assert c.n == 25 and c.verdict
    assert c.hom_sys_lower == pytest.approx(8.8137358702, abs=1e-10)
    assert c.sys_upper == pytest.approx(7.0509886962, abs=1e-10)
    tie = hairy_torus_certificate(1, 4)
    assert abs(tie.hom_sys_lower - tie.sys_upper) <= 1e-12
    assert not tie.verdict
    c3 = hairy_torus_certificate(3, 5)
    assert c3.n == 75 and c3.verdict
    assert c3.sys_upper == pytest.approx(4 * math.acosh(3.16), abs=1e-12)
    assert c3.sys_upper == pytest.approx(mp_bound(3, 75), abs=1e-12)
    assert c3.sys_upper == pytest.approx(7.2707477408, abs=1e-10)
    c24 = hairy_torus_certificate(2, 4)
    assert c24.n == 32 and not c24.verdict
    assert c24.sys_upper == pytest.approx(4 * math.acosh(3.1875), abs=1e-12)
    with pytest.raises(ValueError):
        hairy_torus_certificate(0, 5)


def test_minimal_m():
    assert minimal_m(1) == 5
    assert minimal_m(2) == 5
    assert all(minimal_m(g) == 5 for g in range(1, 200))


def test_minimal_m_sweep_constant():
    out = minimal_m_sweep(1_000_000)
    assert out.shape == (1_000_000,)
    assert np.all(out == 5)


def test_sweep_agrees_with_exact_path():
    out = minimal_m_sweep(300)
    assert [minimal_m(g) for g in range(1, 301)] == out.tolist()


def test_proposition():
    rows = proposition_check(100)
    assert len(rows) == 100 and all(r.passed for r in rows)
    one = proposition_check(1)
    assert len(one) == 1 and one[0].passed
    assert one[0].margin == pytest.approx(2 * ASINH1, abs=1e-12)
    assert one[0].margin == pytest.approx(1.7627, abs=1e-4)
    assert "assumed" in MONOTONICITY_NOTE
    with pytest.raises(ValueError):
        proposition_check(0)
