import json
import sys
from pathlib import Path

import numpy as np
import pytest

from spexplore.scene import SceneConfig, generate_synthetic_scene

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def grid_oracle():
    return json.loads((DATA / "nnls_grid_oracle.json").read_text())


@pytest.fixture(scope="session")
def welch_oracle():
    return json.loads((DATA / "welch_oracle.json").read_text())


@pytest.fixture(scope="session")
def small_scene():
    """8x8 grid, 3 endmembers, noiseless in-situ readings."""
    cfg = SceneConfig(K=3, bands=8, highres_w=32, highres_h=32, downsample=4, noise_sigma=0.0,
                      blur_radius=1, patch=8, seed=11)
    return generate_synthetic_scene(cfg)


@pytest.fixture(scope="session")
def mono_scene():
    """8x8 grid with a single endmember."""
    cfg = SceneConfig(K=1, bands=6, highres_w=32, highres_h=32, downsample=4, noise_sigma=0.0, seed=3)
    return generate_synthetic_scene(cfg)


@pytest.fixture(scope="session")
def full_scene():
    """The 32x32-grid, 5-endmember, downsample-4, sigma=0.01 scene."""
    return generate_synthetic_scene(SceneConfig(K=5, highres_w=128, highres_h=128, downsample=4,
                                                noise_sigma=0.01, seed=0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
