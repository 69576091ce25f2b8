"""Hyperbolic trigonometry and PSL(2, R) isometries.

Isometries are stored as real unit-determinant 2x2 matrices and are only
meaningful up to sign, so every comparison goes through ``|trace|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

TAU_DET = 1e-12
TAU_CLS = 1e-9

ASINH1 = math.asinh(1.0)


class HyperbolicDomainError(ValueError):
    """Raised when a formula is evaluated outside its geometric domain."""


@dataclass(frozen=True)
class TrigConstants:
    a1: float = ASINH1
    side: float = 2.0 * ASINH1
    boundary: float = 4.0 * ASINH1
    dmin: float = 2.0 * math.asinh(0.5)
    transversal: float = 8.0 * math.asinh(0.5)


TRIG = TrigConstants()


class IsometryType(str, Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def _renormalize(a: float, b: float, c: float, d: float):
    det = a * d - b * c
    if abs(det - 1.0) > TAU_DET / 10:
        if det <= 0:
            raise HyperbolicDomainError(f"non-positive determinant {det!r}")
        s = math.sqrt(det)
        return a / s, b / s, c / s, d / s
    return a, b, c, d


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry of the upper half-plane."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > TAU_DET:
            a, b, c, d = _renormalize(self.a, self.b, self.c, self.d)
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
            object.__setattr__(self, "c", c)
            object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> Isometry:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_tuple(cls, m) -> Isometry:
        return cls(*m)

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: Isometry) -> Isometry:
        return Isometry(*mat_mul(self.entries, other.entries))

    def inverse(self) -> Isometry:
        return Isometry(self.d, -self.b, -self.c, self.a)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def classify(self) -> IsometryType:
        return classify_trace(self.entries)

    def translation_length(self) -> float:
        return translation_length(self)

    def __call__(self, z: complex) -> complex:
        return mobius(self.entries, z)

    def close_to(self, other: Isometry, tol: float = 1e-9) -> bool:
        """Equality in PSL(2, R)."""
        return projectively_equal(self.entries, other.entries, tol)


# Tuple-level kernels; the enumeration engine works on raw 4-tuples.

def mat_mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_inv(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def mobius(m, z: complex) -> complex:
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def projectively_equal(m, n, tol: float = 1e-9) -> bool:
    plus = max(abs(x - y) for x, y in zip(m, n))
    minus = max(abs(x + y) for x, y in zip(m, n))
    return min(plus, minus) <= tol


def classify_trace(m) -> IsometryType:
    a, b, c, d = m
    t = abs(a + d)
    if abs(t - 2.0) <= TAU_CLS:
        if max(abs(b), abs(c), abs(abs(a) - 1.0), abs(abs(d) - 1.0)) <= TAU_CLS:
            return IsometryType.IDENTITY
        return IsometryType.PARABOLIC
    if t < 2.0:
        return IsometryType.ELLIPTIC
    return IsometryType.HYPERBOLIC


def length_from_trace(t: float) -> float:
    """2 arccosh(|t|/2), clamped at the parabolic boundary."""
    x = abs(t) / 2.0
    return 2.0 * math.acosh(x) if x > 1.0 else 0.0


def trace_from_length(length: float) -> float:
    return 2.0 * math.cosh(length / 2.0)


def translation_length(g) -> float:
    """Length of the closed geodesic represented by ``g``.

    Parabolic elements have length 0; elliptic elements and the identity
    have no closed geodesic and raise :class:`HyperbolicDomainError`.
    """
    m = g.entries if isinstance(g, Isometry) else tuple(g)
    kind = classify_trace(m)
    if kind is IsometryType.PARABOLIC:
        return 0.0
    if kind is not IsometryType.HYPERBOLIC:
        raise HyperbolicDomainError(f"no closed geodesic for {kind.value} element")
    return length_from_trace(m[0] + m[3])


def translation(length: float) -> tuple[float, float, float, float]:
    """Translation by ``length`` along the imaginary axis, upward."""
    e = math.exp(length / 2.0)
    return (e, 0.0, 0.0, 1.0 / e)


def rotation(theta: float) -> tuple[float, float, float, float]:
    """Rotation by ``theta`` about i."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return (c, s, -s, c)


HALF_TURN = (0.0, 1.0, -1.0, 0.0)


def dist(z: complex, w: complex) -> float:
    return math.acosh(cosh_dist(z, w))


def cosh_dist(z: complex, w: complex) -> float:
    return 1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag)


def displacement(m, z: complex) -> float:
    return dist(z, mobius(m, z))


# Closed-form trigonometry

def pants_perp(l1: float, l2: float, l3: float) -> float:
    """Length of the common perpendicular between boundaries 1 and 2 of
    the pair of pants with boundary lengths (l1, l2, l3); l3 = 0 is a cusp."""
    if l1 <= 0 or l2 <= 0:
        raise HyperbolicDomainError("perpendicular needs geodesic boundaries l1, l2 > 0")
    if l3 < 0:
        raise HyperbolicDomainError("l3 must be >= 0")
    num = math.cosh(l1 / 2) * math.cosh(l2 / 2) + math.cosh(l3 / 2)
    den = math.sinh(l1 / 2) * math.sinh(l2 / 2)
    return math.acosh(num / den)


def cusped_pants_self_perp(l1: float) -> float:
    """Length of the simple arc from boundary l1 back to itself, orthogonal
    at both ends, separating the two cusps of a (l1, 0, 0) pants.

    Uses cosh(h/2) = coth(l1/4).
    """
    if l1 <= 0:
        raise HyperbolicDomainError("l1 must be > 0")
    return 2.0 * math.acosh(1.0 / math.tanh(l1 / 4.0))


def ideal_trirectangle_side(a: float) -> float:
    """Side b of a trirectangle with one ideal vertex: sinh a sinh b = 1."""
    if a <= 0:
        raise HyperbolicDomainError("a must be > 0")
    return math.asinh(1.0 / math.sinh(a))


def collar_half_width(length: float) -> float:
    if length <= 0:
        raise HyperbolicDomainError("length must be > 0")
    return math.asinh(1.0 / math.sinh(length / 2.0))


def axis_distance(m, n) -> float:
    """Distance between the axes of two hyperbolic elements with disjoint axes.

    Uses tr(AB) - tr(AB^-1) = +-4 sinh(a/2) sinh(b/2) cosh d with both
    traces taken positive.
    """
    if m[0] + m[3] < 0:
        m = tuple(-x for x in m)
    if n[0] + n[3] < 0:
        n = tuple(-x for x in n)
    la = length_from_trace(m[0] + m[3])
    lb = length_from_trace(n[0] + n[3])
    p = mat_mul(m, n)
    q = mat_mul(m, mat_inv(n))
    diff = abs((p[0] + p[3]) - (q[0] + q[3]))
    ch = diff / (4.0 * math.sinh(la / 2) * math.sinh(lb / 2))
    if ch < 1.0:
        raise HyperbolicDomainError("axes intersect")
    return math.acosh(ch)
