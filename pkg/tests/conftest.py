import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from recosim.harness import load_preset, persist, sweep  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def desk_sweep_dir(tmp_path_factory):
    """One desk-preset sweep shared by the acceptance tests."""
    out = tmp_path_factory.mktemp("desk-sweep")
    config = load_preset("desk")
    outcome = sweep(config, workers=2, progress=False)
    assert not outcome.failures, outcome.failures
    persist(outcome.results, out,
            burn_in_rounds=config.eccentricity_burn_in_rounds)
    (out / "duration.txt").write_text(str(outcome.duration_s))
    return out


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
