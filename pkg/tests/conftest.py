"""Shared fixtures. Oracle implementations live in oracles.py, kept deliberately
independent of the package internals so the two can disagree."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `import oracles` work

from posepilot.config import load_config
from posepilot.world import load_maze_file


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def corridor():
    return load_maze_file("corridor")


@pytest.fixture(scope="session")
def trace_path():
    from importlib import resources
    return resources.files("posepilot.data").joinpath("traces/corridor_60s.jsonl")


@pytest.fixture(scope="session")
def tables_dir():
    from importlib import resources
    return resources.files("posepilot.data").joinpath("tables")
