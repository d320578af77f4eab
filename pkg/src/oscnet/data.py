"""Dataset ingestion: MNIST IDX containers, CSV, PGM images, synthetic blobs.

Feature scaling lives here and only here (pixels are divided by 255 once,
at load time), so every consumer sees identical preprocessing.  The tan
encoding is precise for moderate magnitudes, hence the [0, 1] convention.
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    CountMismatchError,
    LengthMismatchError,
)
from .seeding import substream

__all__ = [
    "LabeledDataset",
    "IdxFile",
    "parse_idx",
    "load_mnist",
    "find_mnist",
    "synth_clusters",
    "load_csv_dataset",
    "read_pgm",
    "write_pgm",
    "read_image_csv",
    "write_image_csv",
    "sha256_of",
]

MAGIC_LABELS = 2049
MAGIC_IMAGES = 2051

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


@dataclass(frozen=True)
class LabeledDataset:
    """Row-major feature matrix with optional integer class labels."""

    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.size == 0:
            raise ValueError("features must be a non-empty 2-D matrix")
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise ValueError("labels must match the number of rows")
            if labels.size and labels.min() < 0:
                raise ValueError("labels must be non-negative class indices")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            raise ValueError("dataset has no labels")
        return int(self.labels.max()) + 1


@dataclass(frozen=True)
class IdxFile:
    """Raw IDX container: big-endian magic, dimension sizes, byte payload."""

    magic: int
    dims: tuple
    payload: bytes

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        expected = int(np.prod(dims)) if dims else 0
        if len(self.payload) != expected:
            raise LengthMismatchError(
                f"payload is {len(self.payload)} bytes, dims {dims} need {expected}"
            )
        object.__setattr__(self, "dims", dims)

    def to_bytes(self) -> bytes:
        header = struct.pack(">I", self.magic)
        header += b"".join(struct.pack(">I", d) for d in self.dims)
        return header + self.payload

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.payload, dtype=np.uint8).reshape(self.dims)


def _read_maybe_gzip(path) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def parse_idx(raw: bytes) -> IdxFile:
    """Parse an IDX blob; re-serializing reproduces the input byte-exactly."""
    if len(raw) < 4:
        raise BadMagicError("file too short for an IDX magic number")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic not in (MAGIC_LABELS, MAGIC_IMAGES):
        raise BadMagicError(f"unknown IDX magic {magic}")
    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise LengthMismatchError("file too short for its dimension header")
    dims = struct.unpack(f">{ndim}I", raw[4:header_len])
    return IdxFile(magic=magic, dims=dims, payload=raw[header_len:])


def load_mnist(images_path, labels_path) -> LabeledDataset:
    """28x28 ubyte images flattened to 784 features in [0, 1], labels 0-9.

    Accepts the de-facto IDX files, gzipped or plain.
    """
    images = parse_idx(_read_maybe_gzip(images_path))
    labels = parse_idx(_read_maybe_gzip(labels_path))
    if images.magic != MAGIC_IMAGES:
        raise BadMagicError(f"{images_path} is not an IDX image file")
    if labels.magic != MAGIC_LABELS:
        raise BadMagicError(f"{labels_path} is not an IDX label file")
    if images.dims[0] != labels.dims[0]:
        raise CountMismatchError(
            f"{images.dims[0]} images vs {labels.dims[0]} labels"
        )
    n = images.dims[0]
    feats = images.as_array().reshape(n, -1).astype(np.float64) / 255.0
    return LabeledDataset(features=feats, labels=labels.as_array().astype(np.int64))


def find_mnist(data_dir=None) -> dict | None:
    """Locate the four MNIST files under data_dir, $OSCNET_DATA_DIR or ./data.

    Returns a dict with train/test image and label paths, or None when any
    file is missing.  Both plain and .gz files are recognized.
    """
    candidates = []
    if data_dir is not None:
        candidates.append(Path(data_dir))
    env = os.environ.get("OSCNET_DATA_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path("data"))
    for root in candidates:
        found = {}
        for key, stem in MNIST_FILES.items():
            for name in (stem, stem + ".gz"):
                p = root / name
                if p.is_file():
                    found[key] = p
                    break
        if len(found) == len(MNIST_FILES):
            return found
    return None


def synth_clusters(k: int, n_per: int, dim: int, spread: float, seed: int) -> LabeledDataset:
    """Seeded isotropic Gaussian blobs with well-separated centers in [0, 1]^dim.

    Centers are drawn uniformly inside [0.15, 0.85]^dim with a minimum
    pairwise separation; feature values are clipped to [0, 1].
    """
    if k < 1 or n_per < 1:
        raise ValueError("k and n_per must be at least 1")
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(substream(seed, "synth-clusters"))
    min_sep = 0.25 if k <= 2**dim else 0.0
    centers = []
    attempts = 0
    while len(centers) < k:
        c = rng.uniform(0.15, 0.85, size=dim)
        attempts += 1
        if attempts > 10_000:
            min_sep /= 2.0  # over-packed request: relax separation
            attempts = 0
        if all(np.linalg.norm(c - prev) >= min_sep for prev in centers):
            centers.append(c)
    centers = np.asarray(centers)
    feats = np.repeat(centers, n_per, axis=0)
    if spread > 0:
        feats = feats + rng.normal(0.0, spread, size=feats.shape)
    feats = np.clip(feats, 0.0, 1.0)
    labels = np.repeat(np.arange(k), n_per)
    return LabeledDataset(features=feats, labels=labels)


def load_csv_dataset(path) -> tuple[np.ndarray, np.ndarray, list]:
    """Read a regression CSV: header row, last column is the target.

    Returns (X, y, feature_names).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    if len(header) < 2:
        raise ValueError("need at least one feature column and one target column")
    if not rows:
        raise ValueError("no data rows")
    arr = np.asarray(rows, dtype=np.float64)
    if arr.shape[1] != len(header):
        raise ValueError("row width does not match the header")
    return arr[:, :-1], arr[:, -1], header[:-1]


def read_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) PGM image as float64 gray levels."""
    raw = Path(path).read_bytes()
    tokens = []
    i = 0
    # Tokenize the header, honoring '#' comments; stops after maxval.
    while len(tokens) < 4 and i < len(raw):
        ch = raw[i : i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
        else:
            start = i
            while i < len(raw) and not raw[i : i + 1].isspace():
                i += 1
            tokens.append(raw[start:i])
    if len(tokens) < 4 or tokens[0] not in (b"P2", b"P5"):
        raise ValueError(f"{path} is not a P2/P5 PGM file")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if tokens[0] == b"P5":
        i += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        count = width * height
        pixels = np.frombuffer(raw, dtype=dtype, count=count, offset=i)
    else:
        pixels = np.array(raw[i:].split(), dtype=np.float64)
        if pixels.size != width * height:
            raise ValueError("P2 pixel count does not match header")
    return pixels.astype(np.float64).reshape(height, width)


def write_pgm(path, image, maxval: int = 255, binary: bool = True) -> None:
    """Write gray levels as PGM; values are clipped to [0, maxval] and rounded."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    levels = np.clip(np.rint(img), 0, maxval)
    h, w = img.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode())
        if binary:
            dtype = np.dtype(">u2") if maxval > 255 else np.uint8
            fh.write(levels.astype(dtype).tobytes())
        else:
            for row in levels.astype(np.int64):
                fh.write((" ".join(str(v) for v in row) + "\n").encode())


def read_image_csv(path) -> np.ndarray:
    """Flat CSV image: one row of comma-separated numbers per pixel row."""
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError("empty image CSV")
    return np.asarray(rows, dtype=np.float64)


def write_image_csv(path, image) -> None:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in img:
            writer.writerow([repr(float(v)) for v in row])


def sha256_of(*arrays) -> str:
    """Checksum of array contents, used to fingerprint ingested datasets."""
    h = hashlib.sha256()
    for arr in arrays:
        if arr is None:
            h.update(b"none")
            continue
        a = np.ascontiguousarray(arr)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()
