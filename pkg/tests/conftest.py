"""
Pytest configuration for package tests.
"""

import sys
import tempfile
from pathlib import Path

import pytest
from click.testing import CliRunner

# Add src to path for imports
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from gameproof.corpus import CUBE, load_resource_proof  # noqa: E402
from gameproof.semantics import Interpretation  # noqa: E402
from gameproof.syntax import parse_sequent  # noqa: E402

CUBE_SCRIPT = ((0, "1.#10"), (3, "0.1.0.#100"), (5, "0.1.1.#1000"))


@pytest.fixture
def runner():
    """Create a CLI test runner."""
    return CliRunner()


@pytest.fixture
def temp_dir():
    """Create a temporary directory for output files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def standard():
    """Arithmetic on {0..15}."""
    return Interpretation.standard()


@pytest.fixture
def cube_sequent():
    return parse_sequent(CUBE)


@pytest.fixture
def cube_proof():
    return load_resource_proof("cube.json")


@pytest.fixture
def copycat_proof():
    return load_resource_proof("copycat.json")


@pytest.fixture
def cube_script():
    return CUBE_SCRIPT
