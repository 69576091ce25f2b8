"""Closed-geodesic enumeration, homology classes, systoles.

The search walks freely reduced words depth-first.  A prefix is extended
only while it moves the basepoint i by at most ``cutoff + slack``; since
cosh d(i, M i) = |M|_F^2 / 2 this is a Frobenius-norm test.  Every
cyclically reduced word met on the way is a candidate closed geodesic.
Conjugacy classes are identified by canonical cyclic words; for closed
surfaces (one relator) words of equal length are further merged when a
conjugating element is found in the orbit ball.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import lattice
from .bounds import systole_upper_bound
from .hypmath import (
    TAU_CLS,
    HyperbolicDomainError,
    cusped_pants_self_perp,
    length_from_trace,
    mat_inv,
    mat_mul,
)
from .dirichlet import DirichletError, dirichlet_domain, element_key, face_pairings, partial_domain
from .pantsgraph import bridges, signature
from .surface import HP_DPS, HolonomyRep
from .words import (
    Word,
    canonical_cyclic,
    cyclic_reduce,
    exponent_vector,
    free_reduce,
    inverse,
    parse_word,
    primitive_root,
)

DEDUP_TOL = 1e-6
DEFAULT_MARGIN = 0.5


@dataclass(frozen=True)
class GeodesicRecord:
    word: Word
    length: float
    hclass: tuple[int, ...]
    hom_trivial: bool


@dataclass(frozen=True)
class SearchBudget:
    """Limits for the word search.

    The certification depth W runs from ``min_depth`` to ``max_depth``: the
    walk goes to W + 2 and the result is certified once nothing new appears
    beyond W.  ``slack`` is
    the extra displacement allowed to prefixes; ``None`` means twice the
    circumradius of the search alphabet's domain plus ``margin``.
    """

    min_depth: int = 3
    max_depth: int = 8
    slack: float | None = None
    margin: float = DEFAULT_MARGIN
    max_nodes: int = 20_000_000
    threads: int | None = None


@dataclass
class SpectrumResult:
    cutoff: float
    records: list[GeodesicRecord]
    certified: bool
    diagnostic: str = ""
    nodes: int = 0
    depth: int = 0
    slack: float = 0.0

    @property
    def systole(self) -> float | None:
        return self.records[0].length if self.records else None

    @property
    def systole_count(self) -> int:
        s = self.systole
        return sum(1 for r in self.records if r.length <= s + DEDUP_TOL) if s is not None else 0

    @property
    def hom_systole(self) -> float | None:
        return next((r.length for r in self.records if not r.hom_trivial), None)

    def witnesses(self, homological: bool = False) -> list[GeodesicRecord]:
        pool = [r for r in self.records if not (homological and r.hom_trivial)]
        if not pool:
            return []
        low = pool[0].length
        return [r for r in pool if r.length <= low + DEDUP_TOL]

    def summary(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "systole": self.systole,
            "systoleCount": self.systole_count,
            "homSystole": self.hom_systole,
            "certified": self.certified,
        }


# Homology

@dataclass(frozen=True)
class _HomologyData:
    rank: int
    projection: list[list[int]]
    cusp_lattice: list[list[int]]


def _homology_data(rep: HolonomyRep) -> _HomologyData:
    cached = getattr(rep, "_hom_cache", None)
    if cached is None:
        r = rep.rank
        vecs = rep.cusp_class_vectors
        cached = _HomologyData(
            rank=r,
            projection=lattice.quotient_projection(vecs, r),
            cusp_lattice=lattice.row_hnf(vecs, r),
        )
        rep._hom_cache = cached
    return cached


def homology_class(rep: HolonomyRep, word) -> tuple[tuple[int, ...], bool]:
    """Class of a word in H1 of the compactified surface, and whether it is 0.

    Cusp loops are killed, so a simple closed curve is trivial exactly when
    it separates.  Triviality is decided by exact lattice membership.
    """
    if isinstance(word, str):
        word = parse_word(word, rep.rank)
    word = tuple(word)
    for x in word:
        if not (isinstance(x, int) and 0 <= x < 2 * rep.rank):
            raise ValueError(f"unknown generator symbol {x!r}")
    data = _homology_data(rep)
    v = exponent_vector(word, data.rank)
    hclass = tuple(lattice.apply_projection(v, data.projection))
    trivial = lattice.in_lattice(v, data.cusp_lattice)
    return hclass, trivial


# Search

@dataclass(frozen=True)
class SearchAlphabet:
    """Letters used by the word search, in inverse pairs (2k, 2k + 1), each
    with its word over the representation's generators."""

    letters: list
    words: list[Word]
    radius: float
    source: str


def _frob2(m) -> float:
    return m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]


def _displacement(m) -> float:
    return math.acosh(max(1.0, _frob2(m) / 2.0))


def search_alphabet(rep: HolonomyRep) -> SearchAlphabet:
    """Face pairings of the Dirichlet domain at i when it closes up with the
    right area; otherwise those of the last partial polygon plus the
    generators."""
    cached = getattr(rep, "_alphabet_cache", None)
    if cached is not None:
        return cached
    g, n = signature(rep.surface.graph)
    target = 2.0 * math.pi * (2 * g - 2 + n)
    extra = [(rep.evaluate(w, precise=True), tuple(w)) for w in rep.cusp_words.values()]
    curves = [tuple(w) for w in rep.pants_curve_words.values() if len(w) > 1]
    seeds = [(rep.evaluate(w, precise=True), w) for w in curves]
    try:
        with mp.workdps(HP_DPS):
            dom = dirichlet_domain(
                rep.generators, [(2 * k,) for k in range(rep.rank)], target, extra,
                evaluate=rep.evaluate_mp, seeds=seeds,
            )
        letters, words = face_pairings(dom)
        alpha = SearchAlphabet(letters, words, dom.radius, "dirichlet")
    except DirichletError as exc:
        # faces of the partial polygon are true faces away from its open
        # part; the generators are added so the letters still generate
        letters, words, radius, source = [], [], 0.0, "generators"
        if exc.state is not None:
            dom = partial_domain(exc.state)
            letters, words = face_pairings(dom)
            radius, source = dom.radius, "partial-dirichlet"
        known = {element_key(m) for m in letters}
        for k in range(rep.rank):
            m = rep.generators[k]
            if element_key(m) in known or element_key(mat_inv(m)) in known:
                continue
            letters += [m, mat_inv(m)]
            words += [(2 * k,), (2 * k + 1,)]
        if source == "generators":
            radius = max(_displacement(m) for m in letters)
        alpha = SearchAlphabet(letters, words, radius, source)
    rep._alphabet_cache = alpha
    return alpha


def default_slack(alpha: SearchAlphabet, margin: float = DEFAULT_MARGIN) -> float:
    return 2.0 * alpha.radius + margin


def _walk(letters, first_letters, cutoff, prefix_bound2, max_len, max_nodes):
    """DFS below the given first letters.  Returns {word: |trace|}, node count,
    longest surviving prefix length and whether max_nodes was hit."""
    trace_cap = 2.0 * math.cosh(cutoff / 2.0) * (1 + 1e-12) + 1e-12
    found: dict[Word, float] = {}
    nodes = 0
    deepest = 0
    n_letters = len(letters)
    stack = [((x,), letters[x]) for x in reversed(first_letters)]
    while stack:
        word, m = stack.pop()
        nodes += 1
        if nodes > max_nodes:
            return found, nodes, deepest, True
        n = len(word)
        if n > deepest:
            deepest = n
        if n == 1 or word[0] != word[-1] ^ 1:
            t = abs(m[0] + m[3])
            if 2.0 + TAU_CLS < t <= trace_cap:
                found[word] = t
        if n >= max_len:
            continue
        last_inv = word[-1] ^ 1
        a, b, c, d = m
        for x in range(n_letters - 1, -1, -1):
            if x == last_inv:
                continue
            e, f, g, h = letters[x]
            child = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
            if (child[0] * child[0] + child[1] * child[1]
                    + child[2] * child[2] + child[3] * child[3]) <= prefix_bound2:
                stack.append((word + (x,), child))
    return found, nodes, deepest, False


def _walk_job(args):
    return _walk(*args)


def _thread_count(budget: SearchBudget) -> int:
    if budget.threads is not None:
        return max(1, budget.threads)
    env = os.environ.get("SYSTOLIC_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ValueError("SYSTOLIC_THREADS must be a positive integer") from None
        if k < 1:
            raise ValueError("SYSTOLIC_THREADS must be a positive integer")
        return k
    return 1


def raw_search(letters, cutoff: float, max_len: int, slack: float,
               max_nodes: int = 20_000_000, threads: int = 1):
    """Pruned DFS over reduced words in ``letters``; the prefix tree is split
    by first letter when running in parallel."""
    bound2 = 2.0 * math.cosh(cutoff + slack)
    firsts = list(range(len(letters)))
    if threads <= 1:
        return _walk(letters, firsts, cutoff, bound2, max_len, max_nodes)
    chunks = [firsts[i::threads] for i in range(threads)]
    jobs = [(letters, c, cutoff, bound2, max_len, max_nodes) for c in chunks if c]
    with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
        parts = list(pool.map(_walk_job, jobs))
    found: dict[Word, float] = {}
    nodes, deepest, hit = 0, 0, False
    for f, n, dp, h in parts:
        found.update(f)
        nodes += n
        deepest = max(deepest, dp)
        hit = hit or h
    return dict(sorted(found.items())), nodes, deepest, hit


def _axis_radius(m):
    """Distance from i to the axis of hyperbolic m (float or mpmath)."""
    half = mp.acosh(abs(m[0] + m[3]) / 2)
    disp = mp.acosh(max(1, (m[0] ** 2 + m[1] ** 2 + m[2] ** 2 + m[3] ** 2) / 2))
    return mp.acosh(max(1, mp.sinh(disp / 2) / mp.sinh(half)))


def _ball(alpha: SearchAlphabet, radius: float, slack: float,
          max_elements: int = 2_000_000) -> np.ndarray:
    """Group elements moving i by at most ``radius``, found by a breadth-first
    walk through elements (not words) that move i by at most radius + slack."""
    keep2 = 2.0 * math.cosh(radius)
    bound2 = 2.0 * math.cosh(radius + slack)
    ident = (1.0, 0.0, 0.0, 1.0)
    seen = {element_key(ident)}
    out = [ident]
    queue = [ident]
    while queue and len(seen) < max_elements:
        nxt = []
        for m in queue:
            for y in alpha.letters:
                c = mat_mul(m, y)
                f2 = _frob2(c)
                if f2 > bound2:
                    continue
                k = element_key(c)
                if k in seen:
                    continue
                seen.add(k)
                nxt.append(c)
                if f2 <= keep2:
                    out.append(c)
        queue = nxt
    return np.array(out)


def _conjugate_in_group(ball: np.ndarray, a, b) -> bool:
    """Is h a h^-1 = b^(+-1) for some h in the ball (rows p, q, r, s)?"""
    p, q, r, s = ball.T
    x0, x1 = p * a[0] + q * a[2], p * a[1] + q * a[3]
    x2, x3 = r * a[0] + s * a[2], r * a[1] + s * a[3]
    conj = np.stack([x0 * s - x1 * r, x1 * p - x0 * q, x2 * s - x3 * r, x3 * p - x2 * q], axis=1)
    for t in (np.asarray(b), np.asarray(mat_inv(b))):
        tol = 1e-7 * max(1.0, float(np.abs(t).max()))
        plus = np.abs(conj - t).max(axis=1)
        minus = np.abs(conj + t).max(axis=1)
        if (np.minimum(plus, minus) <= tol).any():
            return True
    return False


def _axis_reduce(rep: HolonomyRep, alpha: SearchAlphabet, word: Word):
    """Conjugate by letters while that brings the axis closer to i.

    Runs at construction precision: chained conjugations by long letters
    amplify double rounding beyond recognition."""
    with mp.workdps(HP_DPS):
        letters = alpha_mp(rep, alpha)
        m = rep.evaluate_mp(word)
        best = _axis_radius(m)
        improved = True
        while improved:
            improved = False
            for s, s_inv in letters:
                c = mat_mul(s_inv, mat_mul(m, s))
                r = _axis_radius(c)
                if r < best - 1e-9:
                    m, best, improved = c, r, True
        return tuple(float(x) for x in m), float(best)


def alpha_mp(rep: HolonomyRep, alpha: SearchAlphabet):
    cached = getattr(rep, "_alphabet_mp", None)
    if cached is None:
        cached = [(rep.evaluate_mp(w), rep.evaluate_mp(inverse(w))) for w in alpha.words]
        rep._alphabet_mp = cached
    return cached


def _translate(alpha: SearchAlphabet, word: Word) -> Word:
    return cyclic_reduce(free_reduce(tuple(x for l in word for x in alpha.words[l])))


def _class_depths(alpha: SearchAlphabet, found: dict[Word, float]) -> dict[Word, int]:
    """Canonical generator word -> shortest letter word reaching it."""
    by_letters: dict[Word, int] = {}
    for w in found:
        c = canonical_cyclic(w)
        if len(w) < by_letters.get(c, 1 << 30):
            by_letters[c] = len(w)
    depths: dict[Word, int] = {}
    for w, n in by_letters.items():
        c = canonical_cyclic(_translate(alpha, w))
        if c and n < depths.get(c, 1 << 30):
            depths[c] = n
    return depths


def _classes(rep: HolonomyRep, alpha: SearchAlphabet, words, slack: float,
             lengths: dict[Word, float]):
    """Primitive hyperbolic classes among canonical ``words`` with precise
    lengths (memoised in ``lengths``)."""
    classes: dict[Word, float] = {}
    for c in words:
        if c not in lengths:
            if primitive_root(c)[1] > 1:
                lengths[c] = 0.0
            else:
                t = rep.abs_trace(c, precise=True)
                lengths[c] = length_from_trace(t) if t > 2.0 + TAU_CLS else 0.0
        if lengths[c] > 0.0:
            classes[c] = lengths[c]
    if rep.relation_word is None or len(classes) < 2:
        return classes
    # one relator: distinct words can still be conjugate, test geometrically
    items = sorted(classes.items(), key=lambda kv: (kv[1], len(kv[0]), kv[0]))
    reduced = {w: _axis_reduce(rep, alpha, w) for w, _ in items}
    # a conjugator between two such axes moves i by at most r + r' + length/2
    reach = 2 * max(r for _, r in reduced.values()) + items[-1][1] / 2 + 0.5
    ball = _ball(alpha, reach, alpha.radius + DEFAULT_MARGIN)
    kept: list[tuple[Word, float]] = []
    for w, length in items:
        m = reduced[w][0]
        dup = False
        for w2, l2 in kept:
            k = round(length / l2)
            if k < 1 or abs(length - k * l2) > k * DEDUP_TOL:
                continue
            power = reduced[w2][0]
            for _ in range(k - 1):
                power = mat_mul(power, reduced[w2][0])
            if _conjugate_in_group(ball, power, m):
                dup = True
                break
        if not dup:
            kept.append((w, length))
    return dict(kept)


def enumerate_geodesics(rep: HolonomyRep, cutoff: float,
                        budget: SearchBudget = SearchBudget()) -> SpectrumResult:
    """All closed geodesics of length <= cutoff reached by the pruned search.

    The search depth W grows from ``budget.min_depth`` until the records found
    with words of length <= W equal those found with length <= W + 2.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be > 0")
    alpha = search_alphabet(rep)
    slack = budget.slack if budget.slack is not None else default_slack(alpha, budget.margin)
    threads = _thread_count(budget)
    memo: dict[Word, float] = {}
    nodes = 0
    for depth in range(budget.min_depth, budget.max_depth + 1):
        found, n, _, hit = raw_search(
            alpha.letters, cutoff, depth + 2, slack, budget.max_nodes, threads
        )
        nodes += n
        depths = _class_depths(alpha, found)
        full = _classes(rep, alpha, sorted(depths), slack, memo)
        shallow = _classes(rep, alpha, sorted(c for c, k in depths.items() if k <= depth),
                           slack, memo)
        lo = sorted(v for v in shallow.values() if v <= cutoff)
        hi = sorted(v for v in full.values() if v <= cutoff)
        stable = len(lo) == len(hi) and all(abs(x - y) <= DEDUP_TOL for x, y in zip(lo, hi))
        if stable or hit:
            break
    records = []
    for w, length in full.items():
        if length <= cutoff:
            hclass, trivial = homology_class(rep, w)
            records.append(GeodesicRecord(w, length, hclass, trivial))
    records.sort(key=lambda r: (r.length, len(r.word), r.word))
    diagnostic = []
    if hit:
        diagnostic.append(f"node budget {budget.max_nodes} exhausted at depth {depth + 2}")
    elif not stable:
        diagnostic.append(f"records still changing between depth {depth} and {depth + 2}")
    return SpectrumResult(
        cutoff=cutoff,
        records=records,
        certified=stable and not hit,
        diagnostic="; ".join(diagnostic),
        nodes=nodes,
        depth=depth,
        slack=slack,
    )


def naive_lengths(rep: HolonomyRep, cutoff: float, depth: int,
                  max_words: int = 5_000_000) -> dict[Word, float]:
    """Exhaustive oracle: every reduced word in the generators up to ``depth``
    letters, no pruning, evaluated in numpy batches.  Returns canonical words
    of primitive classes with length <= cutoff."""
    letters = np.array(rep.letters())
    n_letters = len(letters)
    inv = np.arange(n_letters) ^ 1
    cap = 2.0 * math.cosh(cutoff / 2.0) * (1 + 1e-12)
    mats = letters.copy()
    words = np.arange(n_letters, dtype=np.int16)[:, None]
    hits: set[Word] = set()
    for length in range(1, depth + 1):
        if length > 1:
            parent = np.repeat(np.arange(len(mats)), n_letters)
            nxt = np.tile(np.arange(n_letters), len(mats))
            ok = nxt != inv[words[parent, -1]]
            parent, nxt = parent[ok], nxt[ok]
            if len(parent) > max_words:
                raise RuntimeError(f"naive enumeration exceeds {max_words} words")
            a, b = mats[parent], letters[nxt]
            mats = np.stack([
                a[:, 0] * b[:, 0] + a[:, 1] * b[:, 2], a[:, 0] * b[:, 1] + a[:, 1] * b[:, 3],
                a[:, 2] * b[:, 0] + a[:, 3] * b[:, 2], a[:, 2] * b[:, 1] + a[:, 3] * b[:, 3],
            ], axis=1)
            words = np.concatenate([words[parent], nxt[:, None].astype(np.int16)], axis=1)
        t = np.abs(mats[:, 0] + mats[:, 3])
        cyc = words[:, 0] != inv[words[:, -1]]
        for row in words[cyc & (t > 2.0 + TAU_CLS) & (t <= cap)]:
            hits.add(canonical_cyclic(tuple(int(x) for x in row)))
    out: dict[Word, float] = {}
    for c in sorted(hits):
        if primitive_root(c)[1] > 1:
            continue
        t = rep.abs_trace(c, precise=True)
        if t > 2.0 + TAU_CLS and length_from_trace(t) <= cutoff:
            out[c] = length_from_trace(t)
    return out


# Systoles

@dataclass
class SystoleReport:
    systole: float | None
    witnesses: list[GeodesicRecord]
    hom_systole: float | None
    hom_witnesses: list[GeodesicRecord]
    certified: bool
    spectrum: SpectrumResult = field(repr=False)


def _candidate_words(rep: HolonomyRep) -> list[Word]:
    r = rep.rank
    words = [tuple(w) for w in rep.pants_curve_words.values()]
    words += [(2 * k,) for k in range(r)]
    words += [(x, y) for x in range(2 * r) for y in range(2 * r) if x < y and y != x ^ 1]
    return words


def initial_cutoffs(rep: HolonomyRep) -> tuple[float, float | None]:
    """Upper bounds for sys and sys^h: the a priori bound (cusped or closed),
    shrunk to the shortest known (homologically non-trivial) curve among
    pants curves, generators, their pairwise products and the search
    letters."""
    g, n = signature(rep.surface.graph)
    try:
        sys_up = systole_upper_bound(g, n)
    except HyperbolicDomainError:
        sys_up = math.inf
    if sys_up <= 0.0:
        # (0, 3): the cusped bound degenerates to 0 and says nothing
        sys_up = math.inf
    hom_up = math.inf
    words = _candidate_words(rep)
    words += [canonical_cyclic(_translate(search_alphabet(rep), (x,)))
              for x in range(0, len(search_alphabet(rep).letters), 2)]
    for w in words:
        if not w:
            continue
        t = rep.abs_trace(w, precise=True)
        if t <= 2.0 + TAU_CLS:
            continue
        length = length_from_trace(t)
        sys_up = min(sys_up, length)
        if length < hom_up and not homology_class(rep, w)[1]:
            hom_up = length
    return sys_up, (hom_up if math.isfinite(hom_up) else None)


def systole_report(rep: HolonomyRep, budget: SearchBudget = SearchBudget(),
                   homological: bool = True) -> SystoleReport:
    sys_up, hom_up = initial_cutoffs(rep)
    cutoff = sys_up
    if homological and hom_up is not None:
        cutoff = max(cutoff, hom_up)
    if not math.isfinite(cutoff):
        raise HyperbolicDomainError("no closed geodesic found to bound the search")
    spec = enumerate_geodesics(rep, cutoff + 10 * DEDUP_TOL, budget)
    hom_w = spec.witnesses(homological=True) if homological else []
    return SystoleReport(
        systole=spec.systole,
        witnesses=spec.witnesses(),
        hom_systole=hom_w[0].length if hom_w else None,
        hom_witnesses=hom_w,
        certified=spec.certified,
        spectrum=spec,
    )


def systoles(rep: HolonomyRep, budget: SearchBudget = SearchBudget()):
    rep_ = systole_report(rep, budget, homological=False)
    return rep_.systole, rep_.witnesses


def hom_systole(rep: HolonomyRep, budget: SearchBudget = SearchBudget()):
    rep_ = systole_report(rep, budget)
    return rep_.hom_systole, rep_.hom_witnesses


def bridge_edges_trivial(rep: HolonomyRep) -> dict[int, tuple[bool, bool]]:
    """edge -> (is bridge, pants curve homologically trivial)."""
    br = bridges(rep.surface.graph)
    return {
        e: (e in br, homology_class(rep, w)[1])
        for e, w in sorted(rep.pants_curve_words.items())
    }


# Straightness

@dataclass(frozen=True)
class StraightnessReport:
    boundary_length: float
    perpendicular: float
    half_boundary: float
    witness: bool

    @property
    def verdict(self) -> str:
        return "non-straight witness" if self.witness else "no witness at this length"


STRAIGHT_TOL = 1e-12


def not_straight_witness(l1: float) -> StraightnessReport:
    """Compare the self-perpendicular h of a (l1, cusp, cusp) pants with half
    of the boundary.  Its endpoints split the boundary into two arcs of
    length l1/2, so h <= l1/2 exhibits a distance-realising path off the
    boundary curve."""
    h = cusped_pants_self_perp(l1)
    return StraightnessReport(l1, h, l1 / 2.0, h <= l1 / 2.0 + STRAIGHT_TOL)


def straightness_crossover(lo: float = 0.1, hi: float = 20.0, tol: float = 1e-13) -> float:
    """Unique l with h(l) = l/2, by bisection."""
    f = lambda x: cusped_pants_self_perp(x) - x / 2.0
    if not (f(lo) > 0 > f(hi)):
        raise ValueError("bracket does not contain the crossover")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
