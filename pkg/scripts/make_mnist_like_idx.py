"""Regenerate data/mnist_like_images.idx and data/mnist_like_labels.idx.

A fixed-seed IDX image/label pair standing in for a small MNIST subset:
6,000 8x8 grayscale images across 10 classes.  Each class has a fixed random
intensity template; images are the template plus pixel noise, clipped to
[0, 1] and quantized to bytes.  The noise level is chosen so a linear
classifier does well but cannot separate the classes perfectly.  The files
are committed; rerun this only if you intend to change them.
"""

import pathlib
import struct
import sys

import numpy as np

COUNT = 6000
SIDE = 8
CLASSES = 10
SEED = 20240118
INTENSITY = 0.5
NOISE_STD = 0.6


def main() -> None:
    rng = np.random.default_rng(SEED)
    templates = rng.uniform(0.0, 1.0, (CLASSES, SIDE * SIDE))
    labels = rng.integers(0, CLASSES, COUNT)
    images = INTENSITY * (templates[labels] + NOISE_STD * rng.standard_normal((COUNT, SIDE * SIDE)))
    pixels = np.clip(np.rint(255.0 * np.clip(images, 0.0, 1.0)), 0, 255).astype(np.uint8)

    out_dir = pathlib.Path(__file__).resolve().parents[1] / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    images_path = out_dir / "mnist_like_images.idx"
    labels_path = out_dir / "mnist_like_labels.idx"

    with images_path.open("wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, COUNT, SIDE, SIDE))
        fh.write(pixels.tobytes())
    with labels_path.open("wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, COUNT))
        fh.write(labels.astype(np.uint8).tobytes())
    print(f"wrote {images_path} and {labels_path} ({COUNT} images, {SIDE}x{SIDE})")


if __name__ == "__main__":
    main()
