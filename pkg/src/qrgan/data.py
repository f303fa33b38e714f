"""Dataset loaders (Optdigits CSV, CIFAR-10 binary) and image preprocessing."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

CIFAR_RECORD = 3073


@dataclass
class LabeledImage:
    """Flat pixel vector, channel-major when ``channels`` > 1."""

    pixels: np.ndarray
    width: int
    height: int
    label: int
    channels: int = 1

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float)
        if self.pixels.shape != (self.channels * self.width * self.height,):
            raise ValueError(
                f"pixel vector shape {self.pixels.shape} does not match "
                f"{self.channels}x{self.height}x{self.width}"
            )

    def as_array(self) -> np.ndarray:
        shape = (self.height, self.width) if self.channels == 1 else (self.channels, self.height, self.width)
        return self.pixels.reshape(shape)


def load_optdigits(path, digit: int | None = None, count: int | None = None) -> list[LabeledImage]:
    """Read the UCI Optdigits CSV (64 pixel counts in 0..16 plus a label)."""
    images = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values = [int(v) for v in line.split(",")]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer field") from None
            if len(values) != 65:
                raise DataError(f"{path}:{lineno}: expected 65 fields, got {len(values)}")
            *pix, label = values
            if min(pix) < 0 or max(pix) > 16 or not 0 <= label <= 9:
                raise DataError(f"{path}:{lineno}: value out of range")
            if digit is not None and label != digit:
                continue
            images.append(LabeledImage(np.array(pix) / 16.0, 8, 8, label))
            if count is not None and len(images) >= count:
                break
    return images


def load_cifar10(path, count: int) -> list[LabeledImage]:
    """First ``count`` records of a CIFAR-10 binary batch file, scaled to [0, 1]."""
    path = Path(path)
    need = count * CIFAR_RECORD
    with open(path, "rb") as fh:
        raw = fh.read(need)
    if len(raw) < need:
        raise DataError(
            f"{path}: truncated at byte offset {len(raw)} "
            f"(record {len(raw) // CIFAR_RECORD}); need {need} bytes for {count} images"
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(count, CIFAR_RECORD)
    return [LabeledImage(r[1:] / 255.0, 32, 32, int(r[0]), channels=3) for r in records]


def to_grayscale(image: LabeledImage) -> LabeledImage:
    if image.channels != 3:
        raise ValueError(f"expected 3 channels, got {image.channels}")
    gray = image.pixels.reshape(3, -1).mean(axis=0)
    return LabeledImage(gray, image.width, image.height, image.label)


def downsample_2x(image: LabeledImage) -> LabeledImage:
    """2x2 mean pooling of a single-channel image."""
    h, w = image.height, image.width
    if image.channels != 1:
        raise ValueError("downsample_2x expects a single-channel image")
    if h % 2 or w % 2:
        raise ValueError(f"odd dimensions {h}x{w}")
    pooled = image.as_array().reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
    return LabeledImage(pooled.ravel(), w // 2, h // 2, image.label)


def split_patches(image, patches: int = 4) -> list[np.ndarray]:
    """Row-major quadrants (TL, TR, BL, BR), each flattened row-major."""
    arr = image.as_array() if isinstance(image, LabeledImage) else np.asarray(image, dtype=float)
    if arr.ndim == 1:
        side = int(round(np.sqrt(arr.size)))
        if side * side != arr.size:
            raise ValueError(f"{arr.size} pixels is not a square image")
        arr = arr.reshape(side, side)
    h, w = arr.shape
    if h != w:
        raise ValueError(f"non-square image {h}x{w}")
    if patches != 4:
        raise ValueError("only quadrant patches (4) are supported")
    if h % 2:
        raise ValueError(f"odd image size {h}")
    m = h // 2
    return [arr[:m, :m].ravel(), arr[:m, m:].ravel(), arr[m:, :m].ravel(), arr[m:, m:].ravel()]


def assemble_patches(patch_seq) -> np.ndarray:
    """Inverse of ``split_patches``: returns the square image as a 2-D array."""
    tl, tr, bl, br = [np.asarray(p, dtype=float) for p in patch_seq]
    m = int(round(np.sqrt(tl.size)))
    q = [p.reshape(m, m) for p in (tl, tr, bl, br)]
    return np.block([[q[0], q[1]], [q[2], q[3]]])


def patch_order(image) -> np.ndarray:
    """Flat image reordered into the quadrant sequence the reservoir consumes."""
    return np.concatenate(split_patches(image))


def image_order(seq) -> np.ndarray:
    """Inverse of ``patch_order``: quadrant sequence back to a row-major flat image."""
    seq = np.asarray(seq, dtype=float)
    return assemble_patches(np.split(seq, 4)).ravel()


def load_dataset(name: str, path, digit: int | None = None, count: int | None = None) -> np.ndarray:
    """Training pool as an (n, pixels) array of row-major flat images.

    ``optdigits`` gives 8x8 images; ``cifar10`` gives 16x16 grayscale.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    if name == "optdigits":
        images = load_optdigits(path, digit=digit, count=count)
    elif name == "cifar10":
        images = [downsample_2x(to_grayscale(im)) for im in load_cifar10(path, count or 500)]
    else:
        raise ValueError(f"unknown dataset {name!r}")
    if not images:
        raise DataError(f"no images selected from {path}")
    return np.stack([im.pixels for im in images])
