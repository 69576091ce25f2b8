"""Acceptance criteria.  Each test records its outcome with the ``criterion``
fixture; the terminal summary prints one PASS/FAIL line per criterion."""
import math
import random
import time

import mpmath
import numpy as np
import pytest

from systolic.bounds import (
    hairy_torus_certificate,
    minimal_m,
    minimal_m_sweep,
    proposition_check,
)
from systolic.cli import k33_surface, verify_k33
from systolic.hypmath import ideal_trirectangle_side, pants_perp
from systolic.pantsgraph import (
    bridges,
    girth,
    random_pants_graph,
    random_signature_graph,
    tripod_replace,
)
from systolic.surface import FNSurface, build_holonomy, validate_rep
from systolic.systole import (
    enumerate_geodesics,
    naive_lengths,
    not_straight_witness,
    systole_report,
)

from test_pantsgraph import edge_trivial, random_graphs

ASINH1 = math.asinh(1.0)
SYS = 4 * ASINH1
FLOOR = 8 * math.asinh(0.5)

SWEEP_SIZE = 50
ORACLE_MAX_RANK = 4
ORACLE_EXTRA_DEPTH = 4
ORACLE_WINDOW = 2.0
VALIDATION_TOL = 1e-9


@pytest.fixture(scope="module")
def k33_result():
    t = time.perf_counter()
    checks, spec = verify_k33()
    return checks, spec, time.perf_counter() - t


def test_criterion_1_k33_systole(k33_result, criterion):
    _, spec, seconds = k33_result
    at_sys = [r for r in spec.records if abs(r.length - SYS) <= 1e-8]
    others = [r for r in spec.records if abs(r.length - SYS) > 1e-8 and r.length < FLOOR - 1e-6]
    ok = spec.certified and len(at_sys) == 11 and not others and seconds <= 300
    criterion("1", "", ok,
              f"{len(at_sys)} geodesics at 4 arcsinh 1, {len(others)} others below "
              f"{FLOOR - 1e-6:.7f}, certified={spec.certified}, {seconds:.1f} s")
    assert ok


def test_criterion_2_homological_dichotomy(k33_result, criterion):
    checks, spec, _ = k33_result
    named = {n: ok for n, ok, _ in checks}
    at_sys = [r for r in spec.records if abs(r.length - SYS) <= 1e-8]
    trivial = [r for r in at_sys if r.hom_trivial]
    hom = spec.hom_systole
    ok = (named["sigma1 trivial"] and len(trivial) == 1 and len(at_sys) - len(trivial) == 10
          and hom is not None and abs(hom - spec.systole) <= 1e-8 and abs(hom - SYS) <= 1e-8)
    criterion("2", "", ok,
              f"trivial systoles {len(trivial)}, nontrivial {len(at_sys) - len(trivial)}, "
              f"sys^h - sys = {(hom or math.nan) - spec.systole:.1e}")
    assert ok


def test_criterion_3_non_straight(criterion):
    w = not_straight_witness(SYS)
    ok = (w.witness and abs(w.perpendicular - 2 * ASINH1) <= 1e-12
          and abs(w.perpendicular - SYS / 2) <= 1e-12)
    criterion("3", "", ok, f"h = {w.perpendicular:.12f}, 2 arcsinh 1 = {2 * ASINH1:.12f}")
    assert ok


def test_criterion_4_trig_identities(criterion):
    d = pants_perp(SYS, SYS, SYS)
    margin = FLOOR - SYS
    with mpmath.workdps(40):
        exact_margin = float(8 * mpmath.asinh(0.5) - 4 * mpmath.asinh(1))
    fixed = ideal_trirectangle_side(ASINH1)
    ok = (abs(d - 2 * math.asinh(0.5)) <= 1e-12
          and margin > 0
          and abs(margin - 0.3242002524) <= 1e-9
          and abs(margin - exact_margin) <= 1e-12
          and f"{margin:.6f}" == "0.324200"
          and abs(fixed - ASINH1) <= 1e-12)
    criterion("4", "", ok,
              f"perp = {d:.12f}, margin = {margin:.10f}, fixed point = {fixed:.12f}")
    assert ok


def test_criterion_5_threshold(criterion):
    t = time.perf_counter()
    exact = {minimal_m(g) for g in range(1, 10**4 + 1)}
    sweep = set(minimal_m_sweep(10**4).tolist())
    seconds = time.perf_counter() - t
    tie = hairy_torus_certificate(1, 4)
    ok = (exact == {5} and sweep == {5}
          and abs(tie.hom_sys_lower - tie.sys_upper) <= 1e-12 and not tie.verdict
          and seconds <= 10)
    criterion("5", "", ok,
              f"minimal m values {sorted(exact)}, (1,4) gap {tie.margin:.1e} "
              f"verdict {str(tie.verdict).lower()}, {seconds:.1f} s")
    assert ok


def test_criterion_6_proposition(criterion):
    rows = proposition_check(100)
    failed = [r.g for r in rows if not r.passed]
    ok = not failed and abs(rows[0].margin - 2 * ASINH1) <= 1e-9
    criterion("6", "", ok, f"{len(rows) - len(failed)}/{len(rows)} rows pass, "
                           f"margin at g = 1 {rows[0].margin:.10f}")
    assert ok


def test_twist_invariance(criterion):
    values = []
    for seed in range(1, 6):
        spec = enumerate_geodesics(build_holonomy(k33_surface(seed)), FLOOR - 1e-6)
        count = sum(abs(r.length - SYS) <= 1e-8 for r in spec.records)
        values.append((spec.certified, spec.systole, count))
    ok = all(c and abs(s - SYS) <= 1e-8 and n == 11 for c, s, n in values)
    criterion("twist invariance", "", ok,
              f"5 random twist vectors, counts {[n for _, _, n in values]}")
    assert ok


# Property suites on a seeded sweep of random surfaces

def sweep_surfaces(seed: int = 0, count: int = SWEEP_SIZE) -> list[FNSurface]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        while True:
            g, n = rng.randint(0, 3), rng.randint(0, 4)
            if 2 * g - 2 + n > 0:
                break
        graph = random_signature_graph(rng, g, n)
        lengths = tuple(rng.uniform(0.5, 6.0) for _ in graph.gluings)
        twists = tuple(rng.uniform(-3.0, 3.0) for _ in graph.gluings)
        out.append(FNSurface(graph, lengths, twists))
    return out


@pytest.fixture(scope="module")
def sweep():
    surfaces = sweep_surfaces()
    return [(s, build_holonomy(s)) for s in surfaces]


def test_criterion_7a_sys_le_hom(sweep, criterion):
    bad, uncertified = [], []
    for i, (_, rep) in enumerate(sweep):
        report = systole_report(rep)
        if not report.certified:
            uncertified.append(i)
        if report.hom_systole is not None and report.systole > report.hom_systole + 1e-12:
            bad.append(i)
    ok = not bad and not uncertified
    criterion("7", "(a)", ok, f"sys <= sys^h on {len(sweep) - len(bad)}/{len(sweep)}, "
                              f"uncertified {uncertified}")
    assert ok


def test_criterion_7b_validation(sweep, criterion):
    bad = []
    for i, (surface, rep) in enumerate(sweep):
        rows = validate_rep(rep, surface).rows
        if not rows or any(abs(r.measured - r.expected) > VALIDATION_TOL for r in rows):
            bad.append(i)
    ok = not bad
    criterion("7", "(b)", ok, f"validation within 1e-9 on {len(sweep) - len(bad)}/{len(sweep)}")
    assert ok


def test_criterion_7c_oracle(sweep, criterion):
    checked, missed, extra = 0, 0, 0
    for _, rep in sweep:
        if rep.rank > ORACLE_MAX_RANK:
            continue
        report = systole_report(rep)
        cutoff = report.systole + ORACLE_WINDOW
        spec = enumerate_geodesics(rep, cutoff)
        oracle = naive_lengths(rep, cutoff, spec.depth + ORACLE_EXTRA_DEPTH)
        found = np.array([r.length for r in spec.records])
        seen = np.array(list(oracle.values()))
        missed += sum(not np.any(np.abs(found - x) <= 1e-9) for x in seen)
        extra += sum(not np.any(np.abs(seen - x) <= 1e-9) for x in found)
        checked += 1
    ok = checked > 0 and missed == 0 and extra == 0
    criterion("7", "(c)", ok, f"{checked} surfaces with <= {ORACLE_MAX_RANK} generators, "
                              f"{missed} missed, {extra} unmatched")
    assert ok


def test_criterion_7d_girth(criterion):
    rng = random.Random(101)
    tried, bad = 0, 0
    while tried < 200:
        v = rng.randrange(2, 13)
        n = rng.randrange(0, v + 1)
        if (3 * v - n) % 2:
            continue
        g = random_pants_graph(rng, v, n)
        edges = [e for e in range(g.n_edges) if len(set(g.endpoints(e))) == 2]
        if not edges:
            continue
        tried += 1
        bad += girth(tripod_replace(g, rng.choice(edges))) < girth(g)
    ok = bad == 0
    criterion("7", "(d)", ok, f"girth kept on {tried - bad}/{tried} graphs")
    assert ok


def test_criterion_7e_bridge_trivial(criterion):
    _, graphs = random_graphs(102, 200)
    bad = 0
    for g in graphs:
        br = bridges(g)
        bad += any((e in br) != edge_trivial(g, e) for e in range(g.n_edges))
    ok = bad == 0
    criterion("7", "(e)", ok, f"bridge iff trivial on {len(graphs) - bad}/{len(graphs)} graphs")
    assert ok
