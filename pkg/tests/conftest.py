import os
import sys

import pytest

here = os.path.dirname(os.path.realpath(__file__))
sys.path.insert(0, os.path.join(here, ".."))
sys.path.insert(0, os.path.join(here, "../src"))

from thimble import saddles  # noqa: E402


@pytest.fixture
def atlas_bc():
    return saddles.BoundaryData.from_duration(-1.0, 1.0, 3.0)


@pytest.fixture
def origin_bc():
    """xi = xf = 0 at a short real time."""
    return saddles.BoundaryData.from_duration(0.0, 0.0, 0.5)


@pytest.fixture
def config_file(tmp_path):
    def write(text):
        path = tmp_path / "thimble.cfg"
        path.write_text(text)
        return str(path)

    return write
