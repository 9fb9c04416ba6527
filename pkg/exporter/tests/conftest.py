import numpy as np
import pytest
from PIL import Image

from fsod_export import FeatureExtractor, get_spec


@pytest.fixture(scope="session")
def extractor():
    """Randomly initialized trunk; checkpoint-free so the suite runs offline."""
    return FeatureExtractor(get_spec("supervised"), random_init=True)


@pytest.fixture()
def image_dir(tmp_path):
    def make(count=4, size=32, seed=0, folder="imgs"):
        rng = np.random.default_rng(seed)
        folder_path = tmp_path / folder
        folder_path.mkdir(exist_ok=True)
        for i in range(count):
            arr = np.clip(rng.normal(128, 24, size=(size, size, 3)), 0, 255).astype(
                np.uint8
            )
            Image.fromarray(arr).save(folder_path / f"img_{i:03d}.png")
        return folder_path

    return make
