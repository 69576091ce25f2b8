"""Closed-form systole bounds and hairy-torus certificates.

A hairy torus built from an m x m board of cusped squares of side
2 arcsinh 1 has homological systole at least 2m arcsinh 1; chaining g of
them gives signature (g, g m^2).  Comparing that with the upper bound
4 arccosh((6g - 6 + 3n)/n) on the systole of any surface of signature
(g, n) certifies sys^h > sys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .hypmath import ASINH1, HyperbolicDomainError, ideal_trirectangle_side

MAX_M = 100


def square_side() -> float:
    """Side of the cusped right-angled square: twice the fixed point of the
    ideal-trirectangle relation sinh a sinh b = 1."""
    a = ASINH1
    assert abs(ideal_trirectangle_side(a) - a) < 1e-15
    return 2.0 * a


def schmutz_bound(g: int, n: int) -> float:
    """Upper bound 4 arccosh((6g - 6 + 3n)/n) on the systole, n >= 1 cusps."""
    if n < 1:
        raise HyperbolicDomainError("bound needs n >= 1 cusps; use closed_fallback_bound")
    q = (6 * g - 6 + 3 * n) / n
    if q < 1:
        raise HyperbolicDomainError(f"signature ({g}, {n}) is not hyperbolic")
    return 4.0 * math.acosh(q)


def closed_fallback_bound(g: int) -> float:
    """Coarse systole upper bound for closed genus-g surfaces."""
    if g < 2:
        raise HyperbolicDomainError("closed hyperbolic surfaces need g >= 2")
    return 2.0 * math.acosh(4 * g - 2)


def systole_upper_bound(g: int, n: int) -> float:
    return schmutz_bound(g, n) if n >= 1 else closed_fallback_bound(g)


def hom_sys_lower(m: int) -> float:
    return m * square_side()


def _strictly_greater(g: int, m: int) -> bool:
    """Decide 2m arcsinh 1 > 4 arccosh(q) at 60 digits.

    Both sides can coincide exactly (e.g. g = 1, m = 4), where double
    rounding would make the strict comparison arbitrary.  Equivalent form:
    cosh(m arcsinh(1)/2) > q with q rational.
    """
    n = g * m * m
    q = Fraction(6 * g - 6 + 3 * n, n)
    with mpmath.workdps(60):
        lhs = mpmath.cosh(m * mpmath.asinh(1) / 2)
        diff = lhs - mpmath.mpf(q.numerator) / q.denominator
        if abs(diff) < mpmath.mpf(10) ** -45:
            return False
        return diff > 0


@dataclass(frozen=True)
class HairyTorusCert:
    g: int
    m: int
    n: int
    hom_sys_lower: float
    sys_upper: float
    verdict: bool

    @property
    def margin(self) -> float:
        return self.hom_sys_lower - self.sys_upper


def hairy_torus_certificate(g: int, m: int) -> HairyTorusCert:
    if g < 1 or m < 1:
        raise ValueError("need g >= 1 and m >= 1")
    n = g * m * m
    return HairyTorusCert(
        g=g, m=m, n=n,
        hom_sys_lower=hom_sys_lower(m),
        sys_upper=schmutz_bound(g, n),
        verdict=_strictly_greater(g, m),
    )


def minimal_m(g: int) -> int:
    for m in range(1, MAX_M + 1):
        if hairy_torus_certificate(g, m).verdict:
            return m
    raise RuntimeError(f"no m <= {MAX_M} certifies genus {g}")


def minimal_m_sweep(g_max: int) -> np.ndarray:
    """Vectorised minimal m for g = 1..g_max in double precision.

    Ties are broken toward 'not strictly greater' with a 1e-12 band, which
    only matters at g = 1, m = 4.
    """
    g = np.arange(1, g_max + 1, dtype=float)
    out = np.zeros(g_max, dtype=int)
    for m in range(1, MAX_M + 1):
        n = g * m * m
        upper = 4.0 * np.arccosh((6 * g - 6 + 3 * n) / n)
        ok = (m * square_side() - upper > 1e-12) & (out == 0)
        out[ok] = m
        if out.all():
            return out
    raise RuntimeError("sweep did not terminate")


@dataclass(frozen=True)
class PropositionRow:
    g: int
    m: int
    n: int
    lower: float
    upper: float
    margin: float
    certificate: bool
    monotone_in_n: bool
    passed: bool


MONOTONICITY_NOTE = (
    "sys^h_{g,n} nondecreasing in n: assumed from the literature, not checked"
)


def proposition_check(g_max: int, n_factor_max: int = 10) -> list[PropositionRow]:
    """Rows for g = 1..g_max: the m = 5 certificate and that the systole bound
    does not increase on n in [25g, n_factor_max * 25g]."""
    if g_max < 1:
        raise ValueError("g_max must be >= 1")
    rows = []
    for g in range(1, g_max + 1):
        cert = hairy_torus_certificate(g, 5)
        ns = range(25 * g, n_factor_max * 25 * g + 1)
        bounds = [schmutz_bound(g, n) for n in ns]
        monotone = all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))
        rows.append(PropositionRow(
            g=g, m=5, n=cert.n, lower=cert.hom_sys_lower, upper=cert.sys_upper,
            margin=cert.margin, certificate=cert.verdict, monotone_in_n=monotone,
            passed=cert.verdict and monotone,
        ))
    return rows
