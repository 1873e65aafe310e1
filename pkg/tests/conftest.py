import re

import pytest

from stablelift.corpus import digraph, standard_corpus


def pytest_runtest_logreport(report):
    """Emit the promised one-line verdict for failed acceptance criteria
    (passing criteria print their own line with timing and a summary)."""
    if report.when == "call" and report.failed:
        m = re.search(r"test_criterion_(\d+)", report.nodeid)
        if m:
            print(f"\n[criterion {m.group(1)}] FAIL ({report.duration:.1f}s)")


@pytest.fixture
def m_edge():
    """Two points with a single directed edge; rigid."""
    return digraph(2, [(0, 1)])


@pytest.fixture
def m_pair():
    """Two bare points; automorphism group of order 2."""
    return digraph(2, [])


@pytest.fixture
def m_triple():
    """Three bare points; full symmetric group."""
    return digraph(3, [])


@pytest.fixture(scope="session")
def corpus():
    """Every repetition-free digraph on up to 3 vertices (69 structures)."""
    return standard_corpus(3)
