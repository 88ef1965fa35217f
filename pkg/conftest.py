import os
import sys

import pytest

ROOT = os.path.dirname(os.path.abspath(__file__))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from calc import channels as ch  # noqa: E402
from calc import matcore as mc  # noqa: E402
from calc.quantities import OptimizerOptions  # noqa: E402


@pytest.fixture
def opts():
    """Reduced restarts, single worker: fast and bit-reproducible."""
    return OptimizerOptions(restarts=4, seed=0, n_jobs=1)


@pytest.fixture
def rng():
    return mc.rng_for(1234)


@pytest.fixture
def depol05():
    return ch.depolarizing(2, 0.5)


@pytest.fixture
def id2():
    return ch.identity(2)


@pytest.fixture
def corpus(tmp_path):
    """Channel and state files on disk, as the CLI and suites read them."""
    files = {
        "id2": tmp_path / "id2.json",
        "depol05": tmp_path / "depol05.json",
        "bell": tmp_path / "bell.json",
    }
    ch.save_channel(ch.identity(2), str(files["id2"]))
    ch.save_channel(ch.depolarizing(2, 0.5), str(files["depol05"]))
    ch.save_state(mc.bell_state(), str(files["bell"]), "bell")
    return {k: str(v) for k, v in files.items()}
