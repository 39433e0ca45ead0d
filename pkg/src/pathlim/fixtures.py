"""The canonical fixture digraphs G1..G5 shipped with the package."""
from __future__ import annotations

from importlib import resources

from .graph import WeightedDigraph, parse_digraph

NAMES = ("G1", "G2", "G3", "G4", "G5")


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; expected one of {NAMES}")
    return resources.files("pathlim").joinpath("data", f"{name}.txt").read_text(encoding="utf-8")


def fixture(name: str) -> WeightedDigraph:
    return parse_digraph(fixture_text(name))


def fixture_path(name: str):
    """Location of a fixture file inside the installed package."""
    fixture_text(name)
    return resources.files("pathlim").joinpath("data", f"{name}.txt")


def all_fixtures() -> dict:
    return {name: fixture(name) for name in NAMES}
