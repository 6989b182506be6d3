"""Reference phases shipped with the package."""
from __future__ import annotations

from pathlib import Path

from ..dsl import parse_phase

FIXTURE_DIR = Path(__file__).parent
NAMES = ("t1", "max3", "pair4", "sep4", "pair4_ordered")


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name.lower()}.phase"


def load_fixture(name: str):
    return parse_phase(fixture_path(name).read_text(encoding="utf-8"))
