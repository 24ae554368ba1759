"""Synthetic shapes dataset, PNG and IDX I/O, and dataset directories.

A dataset directory holds PNG files plus a ``labels.csv`` manifest with a
``filename,label`` header. Filenames are relative; the generator places
images under ``train/`` and ``test/`` so a split is the first path part.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DatasetError,
    IdxCountError,
    IdxMagicError,
    IdxTruncatedError,
    PngFormatError,
)
from .image import Image8

SIDE = 28
CLASS_NAMES = ("filled_square", "hollow_square", "cross", "diagonal_stripes")
NOISE_AMPLITUDE = 16
MANIFEST = "labels.csv"

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


# -- synthetic shapes --------------------------------------------------------

def render_shape(label: int, row: int, col: int, size: int) -> np.ndarray:
    """Noise-free 28x28 uint8 rendering of class ``label``.

    The shape occupies the ``size`` x ``size`` box whose top-left corner is
    ``(row, col)``; foreground is 255 on a 0 background.
    """
    if not 0 <= row <= SIDE - size or not 0 <= col <= SIDE - size:
        raise DatasetError(f"box ({row}, {col}, {size}) does not fit in {SIDE}x{SIDE}")
    canvas = np.zeros((SIDE, SIDE), dtype=np.uint8)
    box = canvas[row:row + size, col:col + size]
    if label == 0:
        box[:] = 255
    elif label == 1:
        box[:2, :] = box[-2:, :] = 255
        box[:, :2] = box[:, -2:] = 255
    elif label == 2:
        mid = size // 2
        box[mid - 1:mid + 2, :] = 255
        box[:, mid - 1:mid + 2] = 255
    elif label == 3:
        r, c = np.indices((size, size))
        box[((r + c) // 2) % 2 == 0] = 255
    else:
        raise DatasetError(f"unknown class {label}")
    return canvas


_SIZE_RANGE = {0: (14, 22), 1: (12, 24), 2: (14, 24), 3: (14, 24)}


@dataclass
class SyntheticDataset:
    train_images: list[Image8]
    train_labels: list[int]
    test_images: list[Image8]
    test_labels: list[int]

    @property
    def images(self) -> list[Image8]:
        return self.train_images + self.test_images

    @property
    def labels(self) -> list[int]:
        return self.train_labels + self.test_labels


def gen_dataset(n: int, seed: int = 42) -> SyntheticDataset:
    """``n`` noisy shape images, classes balanced within one, split 80/20."""
    if n < 8:
        raise DatasetError(f"need at least 8 images, got {n}")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % len(CLASS_NAMES))
    images = []
    for label in labels:
        lo, hi = _SIZE_RANGE[int(label)]
        size = int(rng.integers(lo, hi + 1))
        row, col = (int(v) for v in rng.integers(0, SIDE - size + 1, size=2))
        clean = render_shape(int(label), row, col, size).astype(np.int16)
        noise = rng.integers(-NOISE_AMPLITUDE, NOISE_AMPLITUDE + 1, size=clean.shape)
        images.append(Image8(np.clip(clean + noise, 0, 255).astype(np.uint8)))
    n_train = n * 4 // 5
    labels = [int(v) for v in labels]
    return SyntheticDataset(images[:n_train], labels[:n_train], images[n_train:], labels[n_train:])


def stack_unit(images: list[Image8]) -> np.ndarray:
    """(n, pixels) float64 model inputs."""
    return np.stack([img.to_unit() for img in images])


# -- PNG ---------------------------------------------------------------------

def save_png(img: Image8, path: str | os.PathLike) -> None:
    arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    Image.fromarray(arr).save(path, format="PNG")


def load_png(path: str | os.PathLike) -> Image8:
    """8-bit grayscale or RGB PNG, read losslessly."""
    with Image.open(path) as im:
        if im.format != "PNG":
            raise PngFormatError(f"{path}: not a PNG file")
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
        elif im.mode == "RGB":
            arr = np.asarray(im, dtype=np.uint8)
        else:
            raise PngFormatError(f"{path}: unsupported PNG mode {im.mode!r} (need 8-bit L or RGB)")
    return Image8(arr.copy())


# -- IDX ---------------------------------------------------------------------

def parse_idx(image_data: bytes, label_data: bytes) -> tuple[list[Image8], list[int]]:
    if len(image_data) < 4 or len(label_data) < 4:
        raise IdxTruncatedError("IDX header truncated")
    (img_magic,) = struct.unpack_from(">I", image_data, 0)
    (lbl_magic,) = struct.unpack_from(">I", label_data, 0)
    if img_magic != IDX_IMAGES_MAGIC:
        raise IdxMagicError(f"image file magic 0x{img_magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
    if lbl_magic != IDX_LABELS_MAGIC:
        raise IdxMagicError(f"label file magic 0x{lbl_magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
    if len(image_data) < 16:
        raise IdxTruncatedError("IDX image header truncated")
    if len(label_data) < 8:
        raise IdxTruncatedError("IDX label header truncated")
    count, rows, cols = struct.unpack_from(">III", image_data, 4)
    (n_labels,) = struct.unpack_from(">I", label_data, 4)
    if count != n_labels:
        raise IdxCountError(f"{count} images but {n_labels} labels")
    if rows == 0 or cols == 0:
        raise IdxCountError(f"degenerate image dims {rows}x{cols}")
    expected = 16 + count * rows * cols
    if len(image_data) < expected:
        raise IdxTruncatedError(f"image pixels truncated: {len(image_data)} of {expected} bytes")
    if len(label_data) < 8 + count:
        raise IdxTruncatedError(f"labels truncated: {len(label_data)} of {8 + count} bytes")
    pixels = np.frombuffer(image_data, dtype=np.uint8, count=count * rows * cols, offset=16)
    pixels = pixels.reshape(count, rows, cols)
    images = [Image8(p.copy()) for p in pixels]
    labels = [int(v) for v in label_data[8:8 + count]]
    return images, labels


def load_idx(images_path: str | os.PathLike, labels_path: str | os.PathLike):
    with open(images_path, "rb") as f:
        image_data = f.read()
    with open(labels_path, "rb") as f:
        label_data = f.read()
    return parse_idx(image_data, label_data)


def dump_idx(images: list[Image8], labels: list[int]) -> tuple[bytes, bytes]:
    rows, cols = images[0].height, images[0].width
    img = struct.pack(">IIII", IDX_IMAGES_MAGIC, len(images), rows, cols)
    img += b"".join(im.to_bytes() for im in images)
    lbl = struct.pack(">II", IDX_LABELS_MAGIC, len(labels)) + bytes(labels)
    return img, lbl


# -- dataset directories -----------------------------------------------------

def write_dataset(ds: SyntheticDataset, out_dir: str | os.PathLike) -> Path:
    out = Path(out_dir)
    rows = []
    for split, images, labels in (("train", ds.train_images, ds.train_labels),
                                  ("test", ds.test_images, ds.test_labels)):
        (out / split).mkdir(parents=True, exist_ok=True)
        for i, (img, label) in enumerate(zip(images, labels)):
            name = f"{split}/{i:05d}.png"
            save_png(img, out / name)
            rows.append((name, label))
    with open(out / MANIFEST, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["filename", "label"])
        writer.writerows(rows)
    return out / MANIFEST


def read_manifest(data_dir: str | os.PathLike, split: str = "all") -> list[tuple[str, int]]:
    path = Path(data_dir) / MANIFEST
    if not path.is_file():
        raise DatasetError(f"no {MANIFEST} manifest in {data_dir}")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or {"filename", "label"} - set(reader.fieldnames):
            raise DatasetError(f"{path}: expected header 'filename,label'")
        try:
            rows = [(r["filename"], int(r["label"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{path}: malformed row ({exc})") from exc
    if split != "all":
        rows = [r for r in rows if Path(r[0]).parts[0] == split]
    return rows


def load_dataset_dir(data_dir: str | os.PathLike, split: str = "all"):
    """Return ``(ids, images, labels)``; labels are ``None`` without a manifest."""
    data_dir = Path(data_dir)
    if (data_dir / MANIFEST).is_file():
        rows = read_manifest(data_dir, split)
        ids = [name for name, _ in rows]
        labels = [label for _, label in rows]
    else:
        ids = sorted(p.relative_to(data_dir).as_posix() for p in data_dir.rglob("*.png"))
        labels = None
    images = [load_png(data_dir / name) for name in ids]
    return ids, images, labels
