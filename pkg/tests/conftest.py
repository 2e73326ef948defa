"""Shared fixtures: the workspace files parsed once per session."""

import pathlib
import random

import pytest

from catdb.dsl import parse_workspace
from catdb.instance import saturate

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str):
    path = FIXTURES / name
    return parse_workspace(path.read_text(encoding="utf-8"), str(path))


@pytest.fixture(scope="session")
def ws():
    return load_fixture("paper.cdb")


@pytest.fixture(scope="session")
def grp_ws():
    return load_fixture("group.cdb")


@pytest.fixture(scope="session")
def satJ(ws):
    return saturate(ws.instances["J"])


@pytest.fixture
def rng():
    return random.Random(20260824)
