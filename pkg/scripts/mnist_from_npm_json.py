"""Convert the digit JSON files shipped by the ``mnist`` npm package into an
IDX image/label pair.

Usage: python3 scripts/mnist_from_npm_json.py <package/src/digits> <out_dir>

The JSON stores 28x28 images as floats in [0, 1] rounded to three decimals;
pixels are restored to bytes by rounding ``255 * v``.
"""
import json
import struct
import sys
from pathlib import Path

import numpy as np


def main(src, out):
    images, labels = [], []
    for digit in range(10):
        flat = np.array(json.loads((Path(src) / f"{digit}.json").read_text())["data"])
        imgs = flat.reshape(-1, 784)
        images.append(np.clip(np.rint(imgs * 255), 0, 255).astype(np.uint8))
        labels.append(np.full(imgs.shape[0], digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, images.shape[0], 28, 28))
        f.write(images.tobytes())
    with open(out / "train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, labels.shape[0]))
        f.write(labels.tobytes())
    print(f"wrote {images.shape[0]} images to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
