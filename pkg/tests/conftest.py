import pytest

from systolic.hypmath import TRIG
from systolic.pantsgraph import PantsGraph, modified_k33, theta
from systolic.surface import FNSurface, build_holonomy


def punctured_torus(length: float = 2.0, twist: float = 0.0) -> FNSurface:
    graph = PantsGraph(1, (((0, 0), (0, 1)),), ((0, 2),))
    return FNSurface(graph, (length,), (twist,))


def theta_surface(lengths=(2.0, 2.5, 3.0), twists=(0.0, 0.3, -0.4)) -> FNSurface:
    return FNSurface(theta(), lengths, twists)


def k33_surface(length: float = TRIG.boundary, twists=None) -> FNSurface:
    return FNSurface.uniform(modified_k33(), length, twists)


@pytest.fixture(scope="session")
def k33_rep():
    return build_holonomy(k33_surface())


@pytest.fixture(scope="session")
def torus_rep():
    return build_holonomy(punctured_torus())


@pytest.fixture(scope="session")
def theta_rep():
    return build_holonomy(theta_surface())


# Acceptance results: one line per criterion in the terminal summary

ACCEPTANCE = pytest.StashKey[dict]()
CRITERIA = ("1", "2", "3", "4", "5", "6", "7", "twist invariance")


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def criterion(request):
    """record(name, part, passed, detail) stores one acceptance check."""
    results = request.config.stash[ACCEPTANCE]

    def record(name: str, part: str, passed: bool, detail: str) -> bool:
        results.setdefault(name, {})[part] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in CRITERIA:
        parts = results.get(name)
        if not parts:
            terminalreporter.write_line(f"criterion {name}: FAIL (not run)")
            continue
        ok = all(p for p, _ in parts.values())
        detail = "; ".join(f"{k}: {d}" if k else d for k, (_, d) in parts.items())
        terminalreporter.write_line(f"criterion {name}: {'PASS' if ok else 'FAIL'}  {detail}")
