"""Shared fixtures: the shipped scenario is parsed once per session."""

import pytest

from config import DEFAULT_SCENARIO
from engine.scenario_parser import parse_scenario
from engine.threefold_ring import TripleForm


@pytest.fixture(scope="session")
def scenario():
    return parse_scenario(DEFAULT_SCENARIO)


@pytest.fixture(scope="session")
def form():
    return TripleForm.fano222()
