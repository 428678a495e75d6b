"""Writers for small on-disk fixtures used by loader and CLI tests."""
import gzip
from pathlib import Path

import numpy as np


def write_idx(directory, images, labels, prefix="train", compress=False,
              image_magic=0x00000803, label_magic=0x00000801):
    """Write ``images`` (N x rows x cols uint8) and ``labels`` as an IDX pair."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    img = image_magic.to_bytes(4, "big") + b"".join(v.to_bytes(4, "big") for v in (n, rows, cols))
    img += images.tobytes()
    lab = label_magic.to_bytes(4, "big") + labels.size.to_bytes(4, "big") + labels.tobytes()
    suffix = ".gz" if compress else ""
    ip = directory / f"{prefix}-images-idx3-ubyte{suffix}"
    lp = directory / f"{prefix}-labels-idx1-ubyte{suffix}"
    opener = gzip.open if compress else open
    with opener(ip, "wb") as f:
        f.write(img)
    with opener(lp, "wb") as f:
        f.write(lab)
    return ip, lp


def write_pgm(path, img, maxval=255):
    img = np.asarray(img)
    h, w = img.shape
    dtype = ">u2" if maxval > 255 else "u1"
    Path(path).write_bytes(f"P5\n# fixture\n{w} {h}\n{maxval}\n".encode()
                           + img.astype(dtype).tobytes())


def digit_like_idx(directory, n_per_class=12, classes=3, size=8, seed=0):
    """Blocky synthetic 'digits': each class lights a different band of an
    8x8 image, with noise."""
    rng = np.random.default_rng(seed)
    imgs, labs = [], []
    for c in range(classes):
        for _ in range(n_per_class):
            im = rng.integers(0, 60, size=(size, size))
            im[2 * c:2 * c + 3, :] += 180
            imgs.append(np.clip(im, 0, 255))
            labs.append(c)
    return write_idx(directory, np.array(imgs), labs)
