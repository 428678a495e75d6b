"""Dataset loaders, splitting and synthetic fixtures.

Supported inputs:

* IDX image/label pairs (the MNIST distribution format), optionally gzipped.
* CSV with a header row and one sample per line.
* Binary PGM (P5) images listed in a manifest (``path<TAB>label`` per line).

Pixel values are scaled to ``[0, 1]``. Arbitrary label alphabets are
remapped to ``0..C-1`` in sorted order.
"""
from __future__ import annotations

import csv
import gzip
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import (
    BadMagic,
    BadPgmHeader,
    CountMismatch,
    GeometryMismatch,
    MissingColumn,
    NonNumericCell,
    NotEnoughSamples,
    RaggedRow,
    TruncatedFile,
)
from .types import LabeledDataset, make_dataset

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def _read_bytes(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def _remap_labels(raw) -> np.ndarray:
    _, y = np.unique(np.asarray(raw), return_inverse=True)
    return y.astype(int)


def _idx_header(data: bytes, magic: int, path) -> tuple[int, ...]:
    if len(data) < 4:
        raise TruncatedFile(f"{path}: shorter than an IDX header")
    got = int.from_bytes(data[:4], "big")
    if got != magic:
        raise BadMagic(f"{path}: magic 0x{got:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    if len(data) < 4 + 4 * ndim:
        raise TruncatedFile(f"{path}: truncated IDX header")
    return tuple(int.from_bytes(data[4 + 4 * i:8 + 4 * i], "big") for i in range(ndim))


def pool_images(features: np.ndarray, shape: tuple[int, int], factor: int) -> np.ndarray:
    """Average-pool vectorized ``(h, w)`` images by ``factor`` in each axis."""
    h, w = shape
    if h % factor or w % factor:
        raise GeometryMismatch(f"{h}x{w} images are not divisible by {factor}")
    N = features.shape[1]
    imgs = features.T.reshape(N, h // factor, factor, w // factor, factor)
    return imgs.mean(axis=(2, 4)).reshape(N, -1).T


def load_idx(images_path, labels_path, pool: int = 1) -> LabeledDataset:
    """Read an IDX image/label pair into a ``(rows*cols) x N`` dataset.

    ``pool > 1`` average-pools each image by that factor (MNIST 28x28 with
    ``pool=2`` gives 14x14).
    """
    img = _read_bytes(images_path)
    lab = _read_bytes(labels_path)
    n, rows, cols = _idx_header(img, IDX_IMAGES_MAGIC, images_path)
    (m,) = _idx_header(lab, IDX_LABELS_MAGIC, labels_path)
    if n != m:
        raise CountMismatch(f"{n} images but {m} labels")
    need = 16 + n * rows * cols
    if len(img) < need:
        raise TruncatedFile(f"{images_path}: expected {need} bytes, found {len(img)}")
    if len(lab) < 8 + m:
        raise TruncatedFile(f"{labels_path}: expected {8 + m} bytes, found {len(lab)}")
    pix = np.frombuffer(img, dtype=np.uint8, count=n * rows * cols, offset=16)
    X = pix.reshape(n, rows * cols).T.astype(float) / 255.0
    y = np.frombuffer(lab, dtype=np.uint8, count=m, offset=8)
    if pool > 1:
        X = pool_images(X, (rows, cols), pool)
    return make_dataset(X, _remap_labels(y))


def load_csv(path, label_column: Union[str, int] = "label") -> LabeledDataset:
    """One sample per row; ``label_column`` (name or position) holds labels,
    every other column is a numeric feature."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if isinstance(label_column, int):
            if not 0 <= label_column < len(header):
                raise MissingColumn(f"{path}: no column {label_column}")
            li = label_column
        elif label_column in header:
            li = header.index(label_column)
        else:
            raise MissingColumn(f"{path}: no column named {label_column!r}")
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise RaggedRow(f"{path}:{lineno}: {len(rec)} fields, header has {len(header)}")
            vals = []
            for k, cell in enumerate(rec):
                if k == li:
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise NonNumericCell(
                        f"{path}:{lineno}: column {header[k]!r} is not numeric: {cell!r}") from None
            rows.append(vals)
            labels.append(rec[li].strip())
    X = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1).T
    try:
        raw = np.array([float(v) for v in labels])
    except ValueError:
        raw = np.array(labels)
    return make_dataset(X, _remap_labels(raw))


@dataclass(frozen=True)
class DatasetManifest:
    """Image files with labels, relative to ``root``."""

    entries: tuple
    root: Path
    geometry: Optional[tuple[int, int]] = None

    def __post_init__(self):
        paths = [p for p, _ in self.entries]
        if len(set(paths)) != len(paths):
            raise ValueError("manifest paths must be unique")

    @classmethod
    def read(cls, path, geometry=None) -> "DatasetManifest":
        path = Path(path)
        entries = []
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise RaggedRow(f"{path}:{lineno}: expected 'path<TAB>label'")
            entries.append((parts[0], parts[1].strip()))
        return cls(tuple(entries), path.parent, geometry)


def read_pgm(path) -> np.ndarray:
    """Decode a binary PGM (P5) file to a float image in ``[0, 1]``."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise BadPgmHeader(f"{path}: incomplete header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise BadPgmHeader(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise BadPgmHeader(f"{path}: non-integer header field") from None
    if not (w > 0 and h > 0 and 0 < maxval <= 65535):
        raise BadPgmHeader(f"{path}: invalid geometry or maxval")
    pos += 1  # single whitespace after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = w * h * dtype.itemsize
    if len(data) - pos < need:
        raise TruncatedFile(f"{path}: pixel data truncated")
    img = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos).reshape(h, w)
    return img.astype(float) / maxval


def _area_matrix(n_in: int, n_out: int) -> np.ndarray:
    # row i averages input cells overlapping [i, i+1) * n_in / n_out
    M = np.zeros((n_out, n_in))
    scale = n_in / n_out
    for i in range(n_out):
        lo, hi = i * scale, (i + 1) * scale
        for k in range(int(np.floor(lo)), int(np.ceil(hi))):
            M[i, k] = min(hi, k + 1) - max(lo, k)
    return M / scale


def area_resize(img: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Area-average resampling of a 2-D image to ``size = (w, h)``."""
    w, h = size
    return _area_matrix(img.shape[0], h) @ img @ _area_matrix(img.shape[1], w).T


def load_pgm_manifest(manifest: DatasetManifest,
                      resize_to: Optional[tuple[int, int]] = None) -> LabeledDataset:
    """Load every manifest image, optionally area-resized to ``(w, h)``, as a
    row-major vector."""
    cols, shape = [], None
    for rel, _ in manifest.entries:
        img = read_pgm(Path(manifest.root) / rel)
        if resize_to is not None:
            img = area_resize(img, resize_to)
        elif manifest.geometry is not None and img.shape != (manifest.geometry[1], manifest.geometry[0]):
            raise GeometryMismatch(f"{rel}: {img.shape[1]}x{img.shape[0]}, expected "
                                   f"{manifest.geometry[0]}x{manifest.geometry[1]}")
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise GeometryMismatch(f"{rel}: {img.shape[1]}x{img.shape[0]} differs from "
                                   f"{shape[1]}x{shape[0]}")
        cols.append(img.ravel())
    labels = [lab for _, lab in manifest.entries]
    try:
        raw = np.array([float(v) for v in labels])
    except ValueError:
        raw = np.array(labels)
    return make_dataset(np.array(cols).T, _remap_labels(raw))


def split_indices(ds: LabeledDataset, n_per_class: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class sampling without replacement; returns sorted
    ``(train_idx, test_idx)`` column indices."""
    if n_per_class < 1:
        raise NotEnoughSamples("n_per_class must be positive")
    sizes = ds.class_sizes
    if n_per_class > sizes.min():
        c = int(np.argmin(sizes))
        raise NotEnoughSamples(f"class {c} has {sizes[c]} samples, {n_per_class} requested")
    rng = np.random.default_rng(seed)
    train = np.concatenate([rng.choice(ix, n_per_class, replace=False)
                            for ix in ds.class_index])
    train = np.sort(train)
    test = np.setdiff1d(np.arange(ds.n_samples), train)
    return train, test


def subsample_per_class(ds: LabeledDataset, n_per_class: int,
                        seed) -> tuple[LabeledDataset, LabeledDataset]:
    """Train set of ``n_per_class`` random samples per class; the remaining
    samples form the test set."""
    train, test = split_indices(ds, n_per_class, seed)
    return ds.subset(train), ds.subset(test)


def random_subset(ds: LabeledDataset, n: int, seed) -> LabeledDataset:
    """``n`` samples drawn uniformly without replacement (label space kept)."""
    if n > ds.n_samples:
        raise NotEnoughSamples(f"{n} samples requested from {ds.n_samples}")
    idx = np.sort(np.random.default_rng(seed).choice(ds.n_samples, n, replace=False))
    return ds.subset(idx)


def synth_two_feature_toy(n_per_class: int, noise_scale: float = 10.0,
                          seed=0) -> LabeledDataset:
    """Two classes in 2-D where only the second feature is discriminative.

    Row 0 is a shared nuisance feature ~ N(0, noise_scale^2). Row 1 is
    uniform on ``[0, 1]`` for class 0 and ``[5, 6]`` for class 1, a gap of
    four interval widths. With the default scale the nuisance variance
    dominates, so raw-space neighbors and the first principal axis are both
    unreliable while the projection onto row 1 separates the classes.
    """
    if n_per_class < 2:
        raise ValueError("n_per_class must be >= 2")
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n_per_class)
    x1 = rng.normal(0.0, noise_scale, size=y.size)
    x2 = rng.uniform(0.0, 1.0, size=y.size) + 5.0 * y
    return make_dataset(np.vstack([x1, x2]), y)


def find_idx_pair(directory) -> tuple[Path, Path]:
    """Locate an IDX images/labels pair in ``directory``.

    Prefers the standard ``train-*`` file names, then any single pair.
    """
    directory = Path(directory)
    files = sorted(p for p in directory.iterdir() if p.is_file())
    images = [p for p in files if "idx3" in p.name or "images" in p.name]
    labels = [p for p in files if "idx1" in p.name or "labels" in p.name]
    for pref in ("train", ""):
        im = [p for p in images if p.name.startswith(pref)]
        lb = [p for p in labels if p.name.startswith(pref)]
        if len(im) == 1 and len(lb) == 1:
            return im[0], lb[0]
    raise FileNotFoundError(f"no unambiguous IDX image/label pair in {directory}")


def data_root() -> Path:
    """Dataset root directory from ``SLNP_DATA_DIR`` (default: cwd)."""
    return Path(os.environ.get("SLNP_DATA_DIR", "."))
