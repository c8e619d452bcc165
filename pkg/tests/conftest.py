"""Shared fixtures: the standard graph battery.

Graphs are session-scoped so the enumeration count tables (cached per graph
object) are computed once for the whole run.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the brute oracle module

from opentriangle import build_complete, build_cycle, build_hypercube, build_torus


@pytest.fixture(scope="session")
def k2():
    return build_complete(2)


@pytest.fixture(scope="session")
def k3():
    return build_complete(3)


@pytest.fixture(scope="session")
def k4():
    return build_complete(4)


@pytest.fixture(scope="session")
def cycle5():
    return build_cycle(5)


@pytest.fixture(scope="session")
def cycle6():
    return build_cycle(6)


@pytest.fixture(scope="session")
def cycle8():
    return build_cycle(8)


@pytest.fixture(scope="session")
def torus33():
    return build_torus(2, 3)


@pytest.fixture(scope="session")
def hypercube3():
    return build_hypercube(3)


@pytest.fixture(scope="session")
def battery(k2, k3, k4, cycle6, torus33):
    """The standard test battery for oracle agreement."""
    return [k2, k3, k4, cycle6, torus33]


@pytest.fixture(scope="session")
def tiny_battery(k2, k3, k4, cycle5, cycle6):
    """Graphs cheap enough for per-configuration python-loop cross-checks."""
    return [k2, k3, k4, cycle5, cycle6]


@pytest.fixture(scope="session")
def acceptance_battery(k2, k3, k4, cycle6, cycle8, torus33):
    """The six-graph battery the acceptance checks iterate over."""
    return [k2, k3, k4, cycle6, cycle8, torus33]
