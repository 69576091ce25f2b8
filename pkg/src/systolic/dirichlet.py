"""Dirichlet domain at the basepoint i and its face-pairing generators.

Points are sent to the hyperboloid and then to the Klein disk, where the
bisector between the origin and g(origin) is a straight chord; the domain is
an intersection of Euclidean half-planes.  A candidate polygon contains the
true domain, so matching its hyperbolic area with 2 pi |chi| certifies it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypmath import mat_inv, mat_mul
from .words import Word, free_reduce, inverse

AREA_TOL = 1e-6
IDEAL_TOL = 1e-7


class DirichletError(RuntimeError):
    """Growth failed; ``state`` holds the last (polygon, labels, elements)."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


def hyperboloid(m) -> tuple[float, float, float]:
    """Hyperboloid coordinates of m(i); i itself is (1, 0, 0)."""
    a, b, c, d = m
    return (
        (a * a + b * b + c * c + d * d) / 2.0,
        a * c + b * d,
        (a * a + b * b - c * c - d * d) / 2.0,
    )


def element_key(m) -> tuple:
    s = next(x for x in m if abs(x) > 1e-9)
    sign = 1.0 if s > 0 else -1.0
    return tuple(round(sign * x, 6) + 0.0 for x in m)


def _clip(poly, labels, n, c, label):
    """Keep the part of the polygon with n . p <= c."""
    out, out_labels = [], []
    k = len(poly)
    vals = [n[0] * p[0] + n[1] * p[1] - c for p in poly]
    if all(v <= 1e-14 for v in vals):
        return poly, labels, False
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        vp, vq = vals[i], vals[(i + 1) % k]
        if vp <= 0:
            out.append(p)
            if vq > 0:
                out_labels.append(labels[i])
                t = vp / (vp - vq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
                out_labels.append(label)
            else:
                out_labels.append(labels[i])
        elif vq <= 0:
            t = vp / (vp - vq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            out_labels.append(labels[i])
    return out, out_labels, True


def _minkowski(x, y) -> float:
    return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2]


def _lift(p) -> np.ndarray:
    r = 1.0 - p[0] * p[0] - p[1] * p[1]
    return np.array([1.0, p[0], p[1]]) / math.sqrt(r)


def _angle(v, p, q) -> float:
    V, P, Q = _lift(v), _lift(p), _lift(q)
    tp = P + _minkowski(P, V) * V
    tq = Q + _minkowski(Q, V) * V
    cosang = _minkowski(tp, tq) / math.sqrt(_minkowski(tp, tp) * _minkowski(tq, tq))
    return math.acos(max(-1.0, min(1.0, cosang)))


def polygon_area(poly) -> float:
    """Hyperbolic area of a convex Klein-model polygon (ideal vertices allowed)."""
    k = len(poly)
    total = 0.0
    for i in range(k):
        v = poly[i]
        if math.hypot(*v) >= 1.0 - IDEAL_TOL:
            continue
        prev, nxt = poly[i - 1], poly[(i + 1) % k]
        mid = lambda a: (0.5 * (v[0] + a[0]), 0.5 * (v[1] + a[1]))
        total += _angle(v, mid(prev), mid(nxt))
    return (k - 2) * math.pi - total


@dataclass
class DirichletDomain:
    vertices: list[tuple[float, float]]
    faces: list[int]
    elements: list[tuple]
    words: list[Word]
    area: float
    radius: float

    @property
    def n_sides(self) -> int:
        return len(self.vertices)


def _polygon(elements):
    """Intersect the half-planes of all elements, nearest first."""
    order = sorted(range(len(elements)), key=lambda k: hyperboloid(elements[k])[0])
    big = 4.0
    poly = [(-big, -big), (big, -big), (big, big), (-big, big)]
    labels = [-1, -1, -1, -1]
    for k in order:
        x0, x1, x2 = hyperboloid(elements[k])
        if x0 <= 1.0 + 1e-12:
            continue
        poly, labels, _ = _clip(poly, labels, (x1, x2), x0 - 1.0, k)
    return _clean(poly, labels)


def _clean(poly, labels, tol: float = 1e-9, ideal_gap: float = 1e-5):
    """Drop zero-length edges and collapse clusters of near-ideal vertices
    (every bisector of a cusp's parabolics passes through the cusp) into one
    ideal vertex."""
    changed = True
    while changed and len(poly) > 3:
        changed = False
        k = len(poly)
        for i in range(k):
            p, q = poly[i], poly[(i + 1) % k]
            gap = math.hypot(p[0] - q[0], p[1] - q[1])
            near_ideal = all(abs(math.hypot(*x) - 1.0) <= IDEAL_TOL for x in (p, q))
            if gap < tol or (near_ideal and gap < ideal_gap):
                if near_ideal:
                    r = math.hypot(*q)
                    q = (q[0] / r, q[1] / r)
                poly = poly[:i] + [q] + poly[i + 2:] if i + 1 < k else [q] + poly[1:i]
                labels = labels[:i] + labels[i + 1:]
                changed = True
                break
    return poly, labels


def _complete(poly, labels) -> bool:
    return -1 not in labels and all(math.hypot(*p) <= 1.0 + IDEAL_TOL for p in poly)


def _open_samples(poly, grid: int = 7) -> np.ndarray:
    """Points of the polygon inside the disk near its vertices outside it."""
    out = []
    k = len(poly)
    ts = np.linspace(0.05, 0.95, grid)
    for i, v in enumerate(poly):
        if math.hypot(*v) <= 1.0 + IDEAL_TOL:
            continue
        v = np.asarray(v)
        prev, nxt = np.asarray(poly[i - 1]), np.asarray(poly[(i + 1) % k])
        for t in ts:
            edge = (1 - t) * prev + t * nxt
            for s in ts:
                p = (1 - s) * v + s * edge
                if math.hypot(*p) < 1.0 - 1e-9:
                    out.append(p)
    return np.array(out).reshape(-1, 2)


def _cutting_pairs(mats: np.ndarray, samples: np.ndarray, cap: float):
    """Index pairs (i, j) whose product's half-plane excludes some sample.

    Products within 1e-2 of the identity are float cancellation artefacts
    and are skipped.
    """
    pairs = []
    e = mats
    for i, (a, b, c, d) in enumerate(e):
        p = np.stack([a * e[:, 0] + b * e[:, 2], a * e[:, 1] + b * e[:, 3],
                      c * e[:, 0] + d * e[:, 2], c * e[:, 1] + d * e[:, 3]], 1)
        sq = p * p
        x0 = sq.sum(1) / 2
        x1 = p[:, 0] * p[:, 2] + p[:, 1] * p[:, 3]
        x2 = (sq[:, 0] + sq[:, 1] - sq[:, 2] - sq[:, 3]) / 2
        ok = (x0 > 1.01) & (x0 <= cap)
        cut = (np.outer(x1, samples[:, 0]) + np.outer(x2, samples[:, 1])
               > (x0 - 1.0)[:, None]).any(1)
        pairs += [(i, int(j)) for j in np.nonzero(ok & cut)[0]]
    return pairs


EPS = 2.0 ** -52
ERR_TOL = 1e-10


def _norm(m) -> float:
    return math.sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3])


class _Elem:
    """Float matrix with a rounding-error bound.  ``parts`` records how it
    was formed, so the word and a high-precision value are only built for
    elements that are kept."""

    __slots__ = ("m", "err", "parts", "size", "_word", "_hp")

    def __init__(self, m, err, parts, size, word=None, hp=None):
        self.m, self.err, self.parts, self.size = m, err, parts, size
        self._word, self._hp = word, hp

    def word(self) -> Word:
        if self._word is None:
            op, *args = self.parts
            if op == "inv":
                self._word = inverse(args[0].word())
            else:
                self._word = free_reduce(args[0].word() + args[1].word())
        return self._word

    def precise(self, evaluate):
        if self._hp is None:
            op, *args = self.parts
            if op == "leaf":
                self._hp = evaluate(self._word)
            elif op == "inv":
                self._hp = mat_inv(args[0].precise(evaluate))
            else:
                self._hp = mat_mul(args[0].precise(evaluate), args[1].precise(evaluate))
        return self._hp


def _leaf(m, w) -> _Elem:
    return _Elem(m, 4 * EPS * _norm(m), ("leaf",), len(w), word=tuple(w))


def _product(x: _Elem, y: _Elem) -> _Elem:
    f1, f2 = _norm(x.m), _norm(y.m)
    err = x.err * f2 + f1 * y.err + 8 * EPS * f1 * f2
    return _Elem(mat_mul(x.m, y.m), err, ("mul", x, y), x.size + y.size)


def _invert(x: _Elem) -> _Elem:
    return _Elem(mat_inv(x.m), x.err, ("inv", x), x.size)


def dirichlet_domain(generators, gen_words, target_area: float, extra=(),
                     evaluate=None, seeds=(), max_rounds: int = 20,
                     max_disp: float = 30.0, max_scans: int = 4,
                     scan_size: int = 1500) -> DirichletDomain:
    """Grow a set of group elements until their bisectors cut out a polygon
    of the expected area.

    ``gen_words`` are the generators' words, ``extra`` holds (matrix, word)
    cusp parabolics whose conjugates supply the faces through ideal vertices
    and ``seeds`` any further (matrix, word) pairs worth starting from.
    Each element carries a bound on its accumulated rounding error; past
    ``ERR_TOL`` it is recomputed at high precision, where ``evaluate`` maps
    a word to a matrix with high-precision entries (the caller sets the
    working precision).
    """
    cap = math.cosh(max_disp)
    elems: dict[tuple, _Elem] = {}

    def add(x: _Elem):
        x0 = hyperboloid(x.m)[0]
        if not 1.0 + 1e-12 < x0 <= cap:
            return
        f = _norm(x.m)
        if x.err > ERR_TOL * f:
            if evaluate is None:
                return
            x.m = tuple(float(v) for v in x.precise(evaluate))
            x.err = 4 * EPS * f
            if hyperboloid(x.m)[0] <= 1.0 + 1e-12:
                return
        k = element_key(x.m)
        old = elems.get(k)
        if old is None or x.size < old.size:
            elems[k] = x

    base = []
    for m, w in list(zip(generators, gen_words)) + list(extra):
        item = _leaf(m, w)
        base += [item, _invert(item)]
    parabolics = base[2 * len(generators):]
    for m, w in seeds:
        item = _leaf(m, w)
        base += [item, _invert(item)]
    for item in base:
        add(item)
    history: list[float] = []
    scans = 0
    conjugated: set[tuple] = set()
    for _ in range(max_rounds):
        items = list(elems.values())
        poly, labels = _polygon([x.m for x in items])
        faces = sorted(set(l for l in labels if l >= 0))
        history.append(max(math.hypot(*p) for p in poly))
        if (len(history) >= 3 and history[-1] > 1.0 + IDEAL_TOL
                and history[-3] - history[-1] < 1e-6):
            # faces alone stopped producing the missing elements; look for
            # products of nearby elements that cut into the open region
            near = sorted(range(len(items)), key=lambda k: hyperboloid(items[k].m)[0])
            near = near[:scan_size]
            samples = _open_samples(poly)
            before = len(elems)
            if scans < max_scans and len(samples):
                mats = np.array([items[k].m for k in near])
                for i, j in _cutting_pairs(mats, samples, cap):
                    add(_product(items[near[i]], items[near[j]]))
            if len(elems) == before:
                raise DirichletError("Dirichlet domain growth stalled", (poly, labels, items))
            scans += 1
            history.clear()
            continue
        if _complete(poly, labels):
            area = polygon_area(poly)
            if abs(area - target_area) <= AREA_TOL * max(1.0, target_area):
                return _finish(poly, labels, items)
            if area < target_area:
                raise DirichletError("polygon smaller than a fundamental domain", (poly, labels, items))
        face_elems = [items[f] for f in faces]
        for x in face_elems:
            for y in face_elems + base:
                add(_product(x, y))
                add(_product(y, x))
        for x in items:
            k = element_key(x.m)
            if k in conjugated:
                continue
            conjugated.add(k)
            xi = _invert(x)
            for p in parabolics:
                add(_product(_product(x, p), xi))
    raise DirichletError("Dirichlet domain did not close up", (poly, labels, items))


def partial_domain(state) -> DirichletDomain:
    """Best polygon from a failed growth: its faces are faces of the true
    domain except near the vertices outside the disk."""
    poly, labels, items = state
    keep = [i for i, l in enumerate(labels) if l >= 0]
    return _finish([poly[i] for i in keep], [labels[i] for i in keep], items, math.nan)


def _finish(poly, labels, items, area=None) -> DirichletDomain:
    faces = list(labels)
    radius = max(
        (math.acosh(1.0 / math.sqrt(1.0 - p[0] ** 2 - p[1] ** 2))
         for p in poly if math.hypot(*p) < 1.0 - IDEAL_TOL),
        default=0.0,
    )
    return DirichletDomain(
        vertices=poly,
        faces=faces,
        elements=[items[f].m for f in faces],
        words=[items[f].word() for f in faces],
        area=polygon_area(poly) if area is None else area,
        radius=radius,
    )


def face_pairings(dom: DirichletDomain):
    """Letters (m_0, m_0^-1, m_1, m_1^-1, ...) with their words, one pair per
    face element up to inversion.  They generate the group."""
    letters, words, seen = [], [], set()
    for m, w in zip(dom.elements, dom.words):
        k, ki = element_key(m), element_key(mat_inv(m))
        if k in seen or ki in seen:
            continue
        seen.update((k, ki))
        letters += [m, mat_inv(m)]
        words += [w, inverse(w)]
    return letters, words
