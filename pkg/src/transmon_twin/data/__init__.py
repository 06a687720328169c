"""Shipped fixtures: capacitance matrices, run configs and published tables."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    return Path(resources.files(__name__) / name)


def load_table2() -> dict:
    """Characterization table: measured ``[value, 1 sigma]`` pairs and expected values."""
    import json

    return json.loads(fixture_path("table2.json").read_text())
