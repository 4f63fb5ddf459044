from pathlib import Path

import pytest

from tsp2ecm.instance import parse_instance

DATA = Path(__file__).parent / "data"


def load(name: str):
    return parse_instance((DATA / name).read_bytes())


@pytest.fixture
def k3():
    return load("k3.inst")


@pytest.fixture
def k4():
    """4-cycle with unit edges and both chords at cost 2."""
    return load("k4_golden.inst")


@pytest.fixture
def k4_unit():
    return load("k4_unit.inst")


@pytest.fixture
def path3():
    return load("path3.inst")


@pytest.fixture
def theta5():
    return load("theta5.inst")
