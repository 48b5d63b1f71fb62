import itertools
from fractions import Fraction

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


def _scaled_sse(blocks) -> Fraction:
    """Exact SSE of integer-valued blocks: n * SSE = n * sum(x^2) - sum(x)^2."""
    return sum((Fraction(len(b) * sum(x * x for x in b) - sum(b) ** 2, len(b)) for b in blocks),
               Fraction(0))


def brute_force_sse(values, k):
    """Minimal within-cluster SSE over all splits of the sorted values into k
    contiguous non-empty blocks, in exact rational arithmetic."""
    v = sorted(Fraction(x) for x in values)
    if all(x.denominator == 1 for x in v):
        v = [int(x) for x in v]
    n = len(v)
    best = None
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        sse = _scaled_sse([v[a:b] for a, b in zip(bounds, bounds[1:])])
        if best is None or sse < best:
            best = sse
    return best


def exact_sse_of_labels(values, out):
    """SSE of the clustering implied by equal output values, with exact means."""
    groups = {}
    for x, s in zip(values, out):
        groups.setdefault(float(s), []).append(Fraction(x))
    return _scaled_sse(groups.values())


@pytest.fixture(scope="session")
def small_load():
    from iotpga.ingest import generate_synthetic

    return generate_synthetic("daily_load", 24, 3, series_length=16, seed=5)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
