import json
import sys
from pathlib import Path

import pytest

from pathlim.fixtures import NAMES, fixture
from pathlim.oracle import random_digraph

DATA = Path(__file__).parent / "data"


def corpus_seeds():
    return json.loads((DATA / "corpus_seeds.json").read_text())["seeds"]


def corpus_digraphs():
    return [(seed, random_digraph(seed)) for seed in corpus_seeds()]


@pytest.fixture(scope="session")
def fixtures():
    return {name: fixture(name) for name in NAMES}


@pytest.fixture(scope="session")
def corpus():
    return corpus_digraphs()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
