import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from engine.config_builder import SplitMode, TrainConfig  # noqa: E402
from utils.sampling import generate_trunk  # noqa: E402


@pytest.fixture(scope='session')
def trunk_small():
    """400 x 10 Trunk table."""
    return generate_trunk(400, 10, seed=3)


@pytest.fixture(scope='session')
def trunk_medium():
    """1200 x 16 Trunk table, large enough for histogram nodes."""
    return generate_trunk(1200, 16, seed=5)


@pytest.fixture
def quick_config():
    """Small dynamic config with a fixed breakeven, so no timing enters the result."""
    return TrainConfig(n_trees=4, seed=11, n_workers=1, split_mode=SplitMode.DYNAMIC,
                       breakeven=96, bin_count=64)
