import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fixture_scene(tmp_path_factory):
    """Small deterministic scene bundle on disk: 2 context views + 1 target."""
    from pvsm.scene_io import save_scene
    from pvsm.synthetic import random_camera, random_color, random_depth

    root = tmp_path_factory.mktemp("scene")
    rng = np.random.default_rng(777)
    views = []
    for vid in ("ctx0", "ctx1"):
        cam = random_camera(rng, width=32, height=32)
        color = random_color(rng, 32, 32)
        depth = random_depth(rng, 32, 32, invalid_fraction=0.03)
        views.append((vid, cam, color, depth))
    target_cam = random_camera(rng, width=32, height=32)
    target_color = random_color(rng, 32, 32)
    views.append(("tgt", target_cam, target_color, None))
    save_scene(root, views, context_ids=[0, 1], target_ids=[2], world_unit="meters")
    return root
