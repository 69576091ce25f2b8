"""Fenchel-Nielsen surfaces and their Fuchsian holonomy.

Each pair of pants is realised as a discrete subgroup generated by three
boundary elements ``C0 C1 C2 = 1`` with the pants on the left of every
boundary axis.  Pants are then placed along a spanning tree of the pants
graph, glued by a half-turn and a twist translation, and non-tree edges
contribute stable letters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import mpmath as mp
from scipy.optimize import minimize

from .hypmath import (
    HALF_TURN,
    TAU_CLS,
    IsometryType,
    classify_trace,
    mat_inv,
    mat_mul,
    trace_from_length,
)
from .pantsgraph import HomologyBasisData, PantsGraph, Slot, homology_basis
from .words import Word, exponent_vector, format_word, gen, substitute

TAU_HOL = 1e-9
TAU_REL = 1e-8

Matrix = tuple[float, float, float, float]
IDENTITY: Matrix = (1.0, 0.0, 0.0, 1.0)


class SurfaceFormatError(ValueError):
    """Malformed surface file; the message carries the offending field."""


class HolonomyError(RuntimeError):
    def __init__(self, message: str, where=None):
        super().__init__(message)
        self.where = where


@dataclass(frozen=True)
class FNSurface:
    graph: PantsGraph
    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "twists", tuple(float(x) for x in self.twists))
        if len(self.lengths) != self.graph.n_edges or len(self.twists) != self.graph.n_edges:
            raise ValueError("need one length and one twist per internal edge")
        for e, x in enumerate(self.lengths):
            if not (x > 0 and math.isfinite(x)):
                raise ValueError(f"edge {e}: length must be a positive finite number")
        for e, t in enumerate(self.twists):
            if not math.isfinite(t):
                raise ValueError(f"edge {e}: twist must be finite")

    @classmethod
    def uniform(cls, graph: PantsGraph, length: float, twists=None) -> FNSurface:
        tw = twists if twists is not None else (0.0,) * graph.n_edges
        return cls(graph, (length,) * graph.n_edges, tuple(tw))

    def with_twists(self, twists) -> FNSurface:
        return FNSurface(self.graph, self.lengths, tuple(twists))

    def to_dict(self) -> dict:
        return {
            "pants": self.graph.n_pants,
            "gluings": [
                {"from": list(a), "to": list(b), "length": self.lengths[e], "twist": self.twists[e]}
                for e, (a, b) in enumerate(self.graph.gluings)
            ],
            "cusps": [list(c) for c in self.graph.cusps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data) -> FNSurface:
        return _parse_surface(data)

    @classmethod
    def from_json(cls, text: str) -> FNSurface:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SurfaceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return _parse_surface(data)

    @classmethod
    def load(cls, path) -> FNSurface:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _slot(value, where: str) -> Slot:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise SurfaceFormatError(f"{where}: expected [pants, slot] integer pair")
    if value[1] not in (0, 1, 2):
        raise SurfaceFormatError(f"{where}: slot must be 0, 1 or 2")
    return (value[0], value[1])


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SurfaceFormatError(f"{where}: expected a number")
    return float(value)


def _parse_surface(data) -> FNSurface:
    if not isinstance(data, dict):
        raise SurfaceFormatError("top level: expected an object")
    unknown = set(data) - {"pants", "gluings", "cusps"}
    if unknown:
        raise SurfaceFormatError(f"top level: unknown keys {sorted(unknown)}")
    for key in ("pants", "gluings", "cusps"):
        if key not in data:
            raise SurfaceFormatError(f"top level: missing key {key!r}")
    n = data["pants"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise SurfaceFormatError("pants: expected a non-negative integer")
    if not isinstance(data["gluings"], list):
        raise SurfaceFormatError("gluings: expected a list")
    if not isinstance(data["cusps"], list):
        raise SurfaceFormatError("cusps: expected a list")
    gluings, lengths, twists = [], [], []
    for i, g in enumerate(data["gluings"]):
        where = f"gluings[{i}]"
        if not isinstance(g, dict):
            raise SurfaceFormatError(f"{where}: expected an object")
        unknown = set(g) - {"from", "to", "length", "twist"}
        if unknown:
            raise SurfaceFormatError(f"{where}: unknown keys {sorted(unknown)}")
        for key in ("from", "to", "length"):
            if key not in g:
                raise SurfaceFormatError(f"{where}: missing key {key!r}")
        gluings.append((_slot(g["from"], f"{where}.from"), _slot(g["to"], f"{where}.to")))
        lengths.append(_number(g["length"], f"{where}.length"))
        twists.append(_number(g.get("twist", 0.0), f"{where}.twist"))
        if not lengths[-1] > 0:
            raise SurfaceFormatError(f"{where}.length: must be > 0")
    cusps = [_slot(c, f"cusps[{i}]") for i, c in enumerate(data["cusps"])]
    try:
        graph = PantsGraph(n, tuple(gluings), tuple(cusps))
        return FNSurface(graph, tuple(lengths), tuple(twists))
    except ValueError as exc:
        raise SurfaceFormatError(f"graph: {exc}") from exc


# Single pants geometry.  Construction runs at HP_DPS digits: words for the
# eliminated cusp wind around the whole planar piece and are too
# ill-conditioned to evaluate in double precision.

HP_DPS = 50


def _conj(n: Matrix, m: Matrix) -> Matrix:
    """n^-1 m n"""
    return mat_mul(mat_inv(n), mat_mul(m, n))


def _unit(m: Matrix) -> Matrix:
    det = m[0] * m[3] - m[1] * m[2]
    s = mp.sqrt(det)
    return tuple(x / s for x in m)


def _positive(m: Matrix) -> Matrix:
    return m if m[0] + m[3] >= 0 else tuple(-x for x in m)


def _to_float(m) -> Matrix:
    return tuple(float(x) for x in m)


def _hp_translation(length) -> Matrix:
    e = mp.exp(mp.mpf(length) / 2)
    return (e, mp.mpf(0), mp.mpf(0), 1 / e)


def _hyperbolic_frame_base(m: Matrix) -> Matrix:
    """G with G(inf) attracting, G(0) repelling fixed point of m."""
    a, b, c, d = _positive(m)
    t = a + d
    root = mp.sqrt(t * t - 4)
    lam, mu = (t + root) / 2, (t - root) / 2

    def eigvec(ev):
        v1 = (b, ev - a)
        v2 = (ev - d, c)
        return v1 if abs(v1[0]) + abs(v1[1]) >= abs(v2[0]) + abs(v2[1]) else v2

    va, vr = eigvec(lam), eigvec(mu)
    g = (va[0], vr[0], va[1], vr[1])
    det = g[0] * g[3] - g[1] * g[2]
    if det < 0:
        g = (-g[0], g[1], -g[2], g[3])
    return _unit(g)


def _fixed_points(m: Matrix) -> list:
    a, b, c, d = _positive(m)
    if abs(c) < mp.mpf(10) ** (-30):
        raise HolonomyError("fixed point at infinity in normalised frame")
    t = a + d
    if abs(t - 2) <= TAU_CLS:
        return [(a - d) / (2 * c)]
    r = mp.sqrt(t * t - 4)
    return [((a - d) - r) / (2 * c), ((a - d) + r) / (2 * c)]


def _frame(m: Matrix, neighbour: Matrix) -> tuple[Matrix, int]:
    """Frame for boundary element ``m``: i -> foot of the perpendicular to
    the fixed set of ``neighbour``, imaginary axis -> axis of m oriented by
    translation.  Also returns the side (-1 left, +1 right) the neighbour
    lies on."""
    g = _hyperbolic_frame_base(m)
    pts = _fixed_points(_conj(g, neighbour))
    prod = pts[0] * pts[-1] if len(pts) == 2 else pts[0] ** 2
    if prod <= 0:
        raise HolonomyError("boundary axes intersect")
    s = mp.sqrt(mp.sqrt(prod))
    side = -1 if pts[0] < 0 else 1
    return mat_mul(g, (s, mp.mpf(0), mp.mpf(0), 1 / s)), side


@dataclass(frozen=True)
class PantsGroup:
    lengths: tuple[float, float, float]
    boundary: tuple[Matrix, Matrix, Matrix]
    frames: tuple[Matrix | None, Matrix | None, Matrix | None]


def pants_group(l0: float, l1: float, l2: float) -> PantsGroup:
    """Normalised pants group (50-digit entries); a length of 0 is a cusp.

    Boundary elements satisfy C0 C1 C2 = 1 with the pants on the left of
    each oriented axis.  ``frames[k]`` maps i to the foot on boundary k of
    the seam towards boundary k+1 and the upward imaginary axis onto the
    axis of C_k.  Built from the trace normal form A = [[x, -1], [1, 0]],
    B = [[0, s], [-1/s, y]] with tr AB = -2 cosh(l2/2).
    """
    with mp.workdps(HP_DPS):
        x = 2 * mp.cosh(mp.mpf(l0) / 2)
        y = 2 * mp.cosh(mp.mpf(l1) / 2)
        s = -mp.exp(mp.mpf(l2) / 2)
        one, zero = mp.mpf(1), mp.mpf(0)
        a = (x, -one, one, zero)
        b = (zero, s, -1 / s, y)
        cs = [a, b, mat_inv(mat_mul(a, b))]
        lengths = (l0, l1, l2)
        hyp = [k for k in range(3) if lengths[k] > 0]
        if not hyp:
            return PantsGroup(lengths, tuple(cs), (None, None, None))
        k = hyp[0]
        f, side = _frame(cs[k], cs[(k + 1) % 3])
        if side > 0:
            cs = [(m[0], -m[1], -m[2], m[3]) for m in cs]
            f, side = _frame(cs[k], cs[(k + 1) % 3])
        cs = [_conj(f, m) for m in cs]
        frames: list[Matrix | None] = [None, None, None]
        for i in hyp:
            fi, side = _frame(cs[i], cs[(i + 1) % 3])
            if side > 0:
                raise HolonomyError(f"inconsistent boundary orientation at slot {i}")
            frames[i] = fi
        return PantsGroup(lengths, tuple(cs), tuple(frames))


# Holonomy of a whole surface

@dataclass
class HolonomyRep:
    surface: FNSurface
    basis: HomologyBasisData
    generators: list[Matrix]
    labels: list[str]
    pants_curve_words: dict[int, Word]
    cusp_words: dict[Slot, Word]
    relation_word: Word | None
    cusp_class_vectors: list[list[int]]
    generators_hp: list = field(default_factory=list, repr=False)
    basepoint: complex = 1j

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def abelianization(self) -> list[list[int]]:
        # the generators form a basis of H1 of the punctured surface (or of
        # the closed surface, whose relator has zero exponent sum)
        r = self.rank
        return [[int(i == j) for j in range(r)] for i in range(r)]

    @property
    def compact_rank(self) -> int:
        return self.basis.rank

    def letters(self) -> list[Matrix]:
        out = []
        for m in self.generators:
            out.append(m)
            out.append(mat_inv(m))
        return out

    def evaluate_mp(self, word) -> Matrix:
        """Word value with mpmath entries at the construction precision."""
        with mp.workdps(HP_DPS):
            letters = []
            for g in self.generators_hp:
                letters += [g, mat_inv(g)]
            m = (mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
            for x in word:
                m = mat_mul(m, letters[x])
            return m

    def evaluate(self, word, precise: bool = False) -> Matrix:
        if precise:
            return _to_float(self.evaluate_mp(word))
        letters = self.letters()
        m = IDENTITY
        for x in word:
            m = mat_mul(m, letters[x])
        return m

    def abs_trace(self, word, precise: bool = False) -> float:
        m = self.evaluate_mp(word) if precise else self.evaluate(word)
        return float(abs(m[0] + m[3]))

    def with_generator(self, k: int, m) -> HolonomyRep:
        """Copy with generator ``k`` replaced (used for fault injection)."""
        gens = list(self.generators)
        hp = list(self.generators_hp)
        gens[k] = tuple(float(x) for x in m)
        with mp.workdps(HP_DPS):
            hp[k] = tuple(mp.mpf(x) for x in m)
        return replace(self, generators=gens, generators_hp=hp)

    def format(self, word) -> str:
        return format_word(word, self.rank)


def _glue(frame_p: Matrix, twist: float, frame_q: Matrix) -> Matrix:
    """Half-turn gluing with the foot of q displaced by ``twist`` along p's
    boundary orientation; the convention is symmetric in p and q."""
    half_turn = tuple(mp.mpf(x) for x in HALF_TURN)
    return mat_mul(mat_mul(frame_p, _hp_translation(twist)), mat_mul(half_turn, mat_inv(frame_q)))


def _cosh_disp(m: Matrix, z: complex) -> float:
    """cosh d(z, m z) via the Frobenius norm of m seen from z."""
    r = math.sqrt(z.imag)
    k = (r, z.real / r, 0.0, 1.0 / r)
    a, b, c, d = mat_mul(mat_inv(k), mat_mul(m, k))
    return (a * a + b * b + c * c + d * d) / 2.0


def _optimal_basepoint(gens: list[Matrix], start: complex) -> complex:
    """Point minimising the total cosh-displacement of the generators."""
    if not gens:
        return start
    gens = [_to_float(m) for m in gens]

    def cost(v):
        z = complex(v[0], math.exp(v[1]))
        return sum(_cosh_disp(m, z) for m in gens)

    res = minimize(cost, [start.real, math.log(start.imag)], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    return complex(float(res.x[0]), math.exp(float(res.x[1])))


def _nielsen_reduce(gens: list[Matrix], tracked: list[Word], labels: list[str],
                    start: complex, rounds: int = 30):
    """Greedy Nielsen moves x_i -> x_j^+-1 x_i or x_i x_j^+-1 that shrink the
    displacement of a basepoint, alternated with re-centring the basepoint.

    Returns new generators, the tracked words rewritten in them, labels and
    the final basepoint.
    """
    gens = list(gens)
    labels = list(labels)
    z = _optimal_basepoint(gens, start)
    for _ in range(rounds):
        changed = False
        while True:
            fl = [_to_float(m) for m in gens]
            disp = [_cosh_disp(m, z) for m in fl]
            move = None
            for i in sorted(range(len(gens)), key=lambda i: (-disp[i], i)):
                best = disp[i] * (1 - 1e-9)
                for j in range(len(gens)):
                    if j == i:
                        continue
                    for e in (1, -1):
                        gj = fl[j] if e > 0 else mat_inv(fl[j])
                        for left in (True, False):
                            cand = mat_mul(gj, fl[i]) if left else mat_mul(fl[i], gj)
                            c = _cosh_disp(cand, z)
                            if c < best:
                                best, move = c, (i, j, e, left)
                if move is not None:
                    break
            if move is None:
                break
            i, j, e, left = move
            gj = gens[j] if e > 0 else mat_inv(gens[j])
            gens[i] = _unit(mat_mul(gj, gens[i]) if left else mat_mul(gens[i], gj))
            back = gen(j, -e)
            image = back + gen(i) if left else gen(i) + back
            tracked = [substitute(w, {i: image}) for w in tracked]
            sign = "" if e > 0 else "^-1"
            labels[i] = f"{labels[j]}{sign}*{labels[i]}" if left else f"{labels[i]}*{labels[j]}{sign}"
            changed = True
        z_new = _optimal_basepoint(gens, z)
        if not changed and abs(z_new - z) < 1e-9:
            break
        z = z_new
    return gens, tracked, labels, z


def build_holonomy(surface: FNSurface, validate: bool = True) -> HolonomyRep:
    """Fuchsian representation of the surface's fundamental group.

    Generators are a free basis (surfaces with cusps) or the 2g standard
    generators of a one-relator presentation (closed surfaces), Nielsen
    reduced around a basepoint that is finally moved to i.
    """
    with mp.workdps(HP_DPS):
        return _build(surface, validate)


def _build(surface: FNSurface, validate: bool) -> HolonomyRep:
    graph = surface.graph
    basis = homology_basis(graph)
    smap = graph.slot_map()
    groups = []
    for p in range(graph.n_pants):
        ls = [surface.lengths[smap[(p, k)][0]] if (p, k) in smap else 0.0 for k in range(3)]
        groups.append(pants_group(*ls))

    ident = (mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
    placement: list = [None] * graph.n_pants
    placement[0] = ident
    for q in basis.bfs_order[1:]:
        p, pslot, e = basis.tree_parent[q]
        qslot = smap[(p, pslot)][1][1]
        glue = _glue(groups[p].frames[pslot], surface.twists[e], groups[q].frames[qslot])
        placement[q] = mat_mul(placement[p], glue)

    def placed(p: int, k: int) -> Matrix:
        return mat_mul(placement[p], mat_mul(groups[p].boundary[k], mat_inv(placement[p])))

    gens: list = []
    labels: list[str] = []
    for kind, ref in basis.generators:
        if kind == "boundary":
            p, k = ref
            gens.append(placed(p, k))
            labels.append(f"boundary({p},{k})")
        else:
            e = ref
            (p, i), (q, j) = graph.gluings[e]
            glue = _glue(groups[p].frames[i], surface.twists[e], groups[q].frames[j])
            gens.append(mat_mul(placement[p], mat_mul(glue, mat_inv(placement[q]))))
            labels.append(f"stable({e})")

    start = complex(-math.tanh(0.5), 1.0 / math.cosh(0.5))
    tracked: list[Word] = list(basis.edge_words.values()) + list(basis.cusp_words.values())
    if basis.relator is not None:
        tracked.append(basis.relator)
    gens, tracked, labels, z = _nielsen_reduce(gens, tracked, labels, start)
    y = mp.mpf(z.imag)
    k = (mp.sqrt(y), mp.mpf(z.real) / mp.sqrt(y), mp.mpf(0), 1 / mp.sqrt(y))
    gens = [_unit(_conj(k, m)) for m in gens]
    n_e = len(basis.edge_words)
    edge_words = dict(zip(basis.edge_words, tracked[:n_e]))
    cusp_words = dict(zip(basis.cusp_words, tracked[n_e:n_e + len(basis.cusp_words)]))
    relator = tracked[-1] if basis.relator is not None else None
    r = len(gens)
    rep = HolonomyRep(
        surface=surface,
        basis=basis,
        generators=[_to_float(m) for m in gens],
        labels=labels,
        pants_curve_words=edge_words,
        cusp_words=cusp_words,
        relation_word=relator,
        cusp_class_vectors=[exponent_vector(w, r) for w in cusp_words.values()],
        generators_hp=gens,
        basepoint=1j,
    )
    if validate:
        report = validate_rep(rep, surface)
        if not report.passed:
            bad = next(r for r in report.rows if not r.passed)
            raise HolonomyError(f"holonomy validation failed: {bad.check}", where=bad.check)
    return rep


@dataclass(frozen=True)
class CheckRow:
    check: str
    measured: float
    expected: float
    passed: bool


@dataclass
class ValidationReport:
    rows: list[CheckRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def validate_rep(rep: HolonomyRep | None, surface: FNSurface | None) -> ValidationReport:
    """Trace, parabolicity and relation checks for a holonomy representation."""
    rows: list[CheckRow] = []
    if rep is None or surface is None:
        return ValidationReport(rows)
    for e, w in sorted(rep.pants_curve_words.items()):
        measured = rep.abs_trace(w, precise=True)
        expected = trace_from_length(surface.lengths[e])
        ok = abs(measured - expected) <= TAU_HOL
        rows.append(CheckRow(f"trace edge {e}", measured, expected, ok))
    for c, w in sorted(rep.cusp_words.items()):
        m = rep.evaluate(w, precise=True)
        measured = abs(m[0] + m[3])
        ok = classify_trace(m) is IsometryType.PARABOLIC
        rows.append(CheckRow(f"parabolic cusp {c}", measured, 2.0, ok))
    if rep.relation_word is not None:
        m = rep.evaluate(rep.relation_word, precise=True)
        err = min(
            max(abs(x - y) for x, y in zip(m, IDENTITY)),
            max(abs(x + y) for x, y in zip(m, IDENTITY)),
        )
        rows.append(CheckRow("relation = +-identity", err, 0.0, err <= TAU_REL))
    return ValidationReport(rows)
