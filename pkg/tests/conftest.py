import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def write_png(path, pixels: np.ndarray) -> None:
    Image.fromarray(pixels.astype(np.uint8), mode="RGB").save(path)


def make_image_tree(root, class_counts: dict[str, int], size=(10, 12), seed=0):
    """Build a class-labeled PNG tree: root/<class>/<class>_<i>.png."""
    rng = np.random.default_rng(seed)
    for class_name, count in class_counts.items():
        class_dir = root / class_name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(count):
            pixels = rng.integers(0, 256, size=(size[0], size[1], 3), dtype=np.uint8)
            write_png(class_dir / f"{class_name}_{i:04d}.png", pixels)
    return root
