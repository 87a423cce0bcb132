from pathlib import Path

import pytest

GOLDEN = Path(__file__).parent / "golden"

# The benchmark system each golden summary was produced on.
SYSTEMS = {"kf-diag": "double_integrator"}


@pytest.fixture
def golden_dir():
    def locate(figure_id):
        return GOLDEN / figure_id / SYSTEMS.get(figure_id, "random")

    return locate
