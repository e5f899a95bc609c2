"""Bundled sample programs."""

from __future__ import annotations

from importlib import resources

from .parser import parse
from .syntax import Program


def fixture_names() -> list:
    root = resources.files(__package__).joinpath("fixtures")
    return sorted(p.name[: -len(".mini")] for p in root.iterdir() if p.name.endswith(".mini"))


def fixture_path(name: str):
    return resources.files(__package__).joinpath("fixtures", f"{name}.mini")


def fixture_source(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def load_fixture(name: str) -> Program:
    return parse(fixture_source(name))
