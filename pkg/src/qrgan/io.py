"""File formats: plain PGM images, record CSVs and flat binary checkpoints."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError

CHECKPOINT_MAGIC = "QRGAN-CHECKPOINT"
CHECKPOINT_VERSION = 1
RECORD_FIELDS = ("iteration", "L_D", "L_G", "mse", "swd")
AGGREGATE_FIELDS = ("iteration", "L_D_mean", "L_D_std", "L_G_mean", "L_G_std",
                    "mse_mean", "mse_std", "swd_mean", "swd_std")


# ----------------------------------------------------------------------- PGM

def write_pgm(path, image: np.ndarray) -> None:
    """Plain (P2) PGM, maxval 255, pixel = round(255 * clip(value, 0, 1))."""
    img = np.atleast_2d(np.asarray(image, dtype=float))
    q = np.rint(255 * np.clip(img, 0.0, 1.0)).astype(int)
    h, w = q.shape
    lines = ["P2", f"{w} {h}", "255"] + [" ".join(str(v) for v in row) for row in q]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens += line.split("#", 1)[0].split()
    if not tokens or tokens[0] != "P2":
        raise DataError(f"{path}: not a plain PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    values = np.array([int(t) for t in tokens[4:]], dtype=float)
    if values.size != w * h:
        raise DataError(f"{path}: expected {w * h} pixels, found {values.size}")
    return values.reshape(h, w) / maxval


def tile(images, side: int, columns: int | None = None) -> np.ndarray:
    """Arrange flat square images in a grid (row-major)."""
    images = [np.asarray(im, dtype=float).reshape(side, side) for im in images]
    columns = columns or len(images)
    rows = -(-len(images) // columns)
    grid = np.zeros((rows * side, columns * side))
    for k, im in enumerate(images):
        r, c = divmod(k, columns)
        grid[r * side:(r + 1) * side, c * side:(c + 1) * side] = im
    return grid


# ----------------------------------------------------------------------- CSV

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_records(path, records) -> None:
    write_csv(path, RECORD_FIELDS, ([getattr(r, f) for f in RECORD_FIELDS] for r in records))


def read_records(path) -> list[dict]:
    out = []
    for row in read_csv(path):
        out.append({k: (int(v) if k == "iteration" else (float(v) if v != "" else None))
                    for k, v in row.items()})
    return out


def aggregate_rows(runs) -> list[list]:
    """Per-iteration mean and (population) standard deviation across runs.

    ``runs`` is a list of record lists (objects or dicts) of equal length.
    """
    def get(r, k):
        return r[k] if isinstance(r, dict) else getattr(r, k)

    rows = []
    for recs in zip(*runs):
        row = [get(recs[0], "iteration")]
        for key in ("L_D", "L_G", "mse", "swd"):
            vals = [get(r, key) for r in recs]
            if any(v is None for v in vals):
                row += [None, None]
            else:
                row += [float(np.mean(vals)), float(np.std(vals))]
        rows.append(row)
    return rows


# ---------------------------------------------------------------- checkpoint

def save_checkpoint(path, arrays: dict, meta: dict) -> None:
    """Text header (metadata, array names and shapes) then little-endian float64 data."""
    header = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}"]
    for k, v in meta.items():
        if any(c.isspace() for c in str(k) + str(v)):
            raise ValueError(f"metadata {k!r}={v!r} contains whitespace")
        header.append(f"meta {k} {v}")
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype="<f8")
        header.append(" ".join(["array", name, *map(str, arr.shape)]) if arr.ndim else f"array {name}")
        blobs.append(arr.tobytes(order="C"))
    header.append("end")
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode())
        for b in blobs:
            fh.write(b)


def load_checkpoint(path) -> tuple[dict, dict]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    arrays, meta, specs = {}, {}, []
    pos = 0
    first = True
    while True:
        nl = raw.find(b"\n", pos)
        if nl < 0:
            raise DataError(f"{path}: unterminated checkpoint header")
        line = raw[pos:nl].decode()
        pos = nl + 1
        if first:
            magic, _, version = line.partition(" ")
            if magic != CHECKPOINT_MAGIC or int(version) != CHECKPOINT_VERSION:
                raise DataError(f"{path}: unsupported checkpoint header {line!r}")
            first = False
            continue
        if line == "end":
            break
        kind, *rest = line.split()
        if kind == "meta":
            meta[rest[0]] = rest[1]
        elif kind == "array":
            specs.append((rest[0], tuple(int(s) for s in rest[1:])))
        else:
            raise DataError(f"{path}: bad header line {line!r}")
    for name, shape in specs:
        n = int(np.prod(shape)) if shape else 1
        nbytes = 8 * n
        if pos + nbytes > len(raw):
            raise DataError(f"{path}: truncated data for array {name}")
        arrays[name] = np.frombuffer(raw, dtype="<f8", count=n, offset=pos).reshape(shape).copy()
        pos += nbytes
    return arrays, meta
