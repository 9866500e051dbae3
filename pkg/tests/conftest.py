import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from samba.features import FeatureConfig  # noqa: E402
from samba.image_io import GrayImage  # noqa: E402


@pytest.fixture(scope="session")
def small_config():
    """Cheap config for tests that only need a valid multi-feature stack."""
    return FeatureConfig(sigmas=(1.0, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_gray(rng):
    return GrayImage.from_array(rng.random((16, 16)))


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    """Trigger numba compilation once so timed tests measure algorithm cost."""
    from samba.features import build_feature_stack
    from samba.forest import ForestParams, segment, train_forest
    from samba.labels import LabelMap, extract_training_set

    img = GrayImage.from_array(np.linspace(0, 1, 12 * 12).reshape(12, 12))
    stack = build_feature_stack(img, FeatureConfig(sigmas=(1.0, 2.0)))
    classes = np.zeros((12, 12), dtype=np.uint8)
    classes[2, 2:6] = 1
    classes[9, 2:6] = 2
    lm = LabelMap(width=12, height=12, classes=classes)
    ts = extract_training_set(stack, [lm])
    model = train_forest(ts, ForestParams(n_trees=2, max_depth=3))
    segment(model, stack)
