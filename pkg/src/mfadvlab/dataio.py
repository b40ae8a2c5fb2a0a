"""Dataset ingestion (IDX container), normalization, configs, CSV persistence.

CSV numeric fields are written with 17 significant digits so 64-bit floats
round-trip exactly.  Experiment configs are JSON documents with an explicit
schema version; unknown versions are rejected.
"""

from dataclasses import dataclass
import csv
import json
import math
import struct

import numpy as np

CONFIG_SCHEMA = "mfadvlab-config/1"
MANIFEST_SCHEMA = "mfadvlab-manifest/1"

_IDX_IMAGES_MAGIC = 0x00000803
_IDX_LABELS_MAGIC = 0x00000801

#: fixed column orders for the documented record types
CSV_SCHEMAS = {
    "TrainTrace": ("step", "t", "sigma_w2", "sigma_b2", "train_acc", "fr_diag", "chi_ratio"),
    "BoundSweep": ("d", "K", "N", "L", "p", "q", "eps", "sample_mean", "sample_std", "bound"),
    "MCSample": ("replicate", "probe", "value"),
}


class ConfigError(ValueError):
    """Malformed or unsupported experiment configuration."""


@dataclass
class Dataset:
    images: np.ndarray     # n x d, values in [0, 1]
    labels: np.ndarray     # n ints
    name: str = ""

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise ValueError("images/labels count mismatch")

    @property
    def n(self):
        return self.images.shape[0]

    @property
    def d(self):
        return self.images.shape[1]

    def subset(self, n: int, seed: int | None = None) -> "Dataset":
        """First-n subset, or a seeded shuffle subset when seed is given."""
        if n >= self.n:
            return self
        if seed is None:
            idx = np.arange(n)
        else:
            idx = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed))).permutation(self.n)[:n]
        return Dataset(self.images[idx], self.labels[idx], self.name)


def _read_exact(f, count, what):
    buf = f.read(count)
    if len(buf) != count:
        raise ValueError(f"truncated IDX file while reading {what}")
    return buf


def load_idx(images_path, labels_path, name: str = "") -> Dataset:
    """Parse big-endian IDX image/label files into a flat float64 dataset."""
    with open(images_path, "rb") as f:
        magic, n, rows, cols = struct.unpack(">iiii", _read_exact(f, 16, "image header"))
        if magic != _IDX_IMAGES_MAGIC:
            raise ValueError(f"bad image magic 0x{magic:08x} in {images_path}")
        raw = _read_exact(f, n * rows * cols, "image data")
    images = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
    images = images.reshape(n, rows * cols)
    with open(labels_path, "rb") as f:
        magic, n_labels = struct.unpack(">ii", _read_exact(f, 8, "label header"))
        if magic != _IDX_LABELS_MAGIC:
            raise ValueError(f"bad label magic 0x{magic:08x} in {labels_path}")
        raw = _read_exact(f, n_labels, "label data")
    labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    if n_labels != n:
        raise ValueError(f"image count {n} != label count {n_labels}")
    return Dataset(images, labels, name)


def write_idx(images: np.ndarray, labels: np.ndarray, images_path, labels_path):
    """Write a dataset in the IDX container (bytes scaled from [0, 1])."""
    n = images.shape[0]
    side = int(round(math.sqrt(images.shape[1])))
    if side * side != images.shape[1]:
        raise ValueError("images must flatten a square raster")
    by = np.clip(np.round(images * 255.0), 0, 255).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">iiii", _IDX_IMAGES_MAGIC, n, side, side))
        f.write(by.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">ii", _IDX_LABELS_MAGIC, n))
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


def make_synthetic(n: int = 8192, side: int = 28, classes: int = 10,
                   seed: int = 0, noise: float = 0.1, stroke_density: float = 0.25,
                   stroke_keep: float = 0.65, distractor_rate: float = 0.05) -> Dataset:
    """Stroke-style class images in [0, 1]; a desk-scale dataset stand-in.

    Each class is a fixed random stroke mask (bright pixels on a dark
    background, like thresholded digits).  Per sample, stroke pixels survive
    with probability stroke_keep and a few background pixels light up as
    distractors, so classes carry real within-class variation rather than a
    single template; pixel noise and clipping finish the job.  Classes differ
    on ~2*density*(1-density)*d pixels with margin ~0.8, so they stay
    separable under sizable per-pixel perturbations.  Useful where the real
    IDX files are not on disk; the training-dynamics experiments depend on
    the network, not on image content.
    """
    d = side * side
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(99,))))
    strokes = rng.uniform(0.0, 1.0, (classes, d)) < stroke_density
    labels = rng.integers(0, classes, size=n)
    on = strokes[labels] & (rng.uniform(0.0, 1.0, (n, d)) < stroke_keep)
    on |= (~strokes[labels]) & (rng.uniform(0.0, 1.0, (n, d)) < distractor_rate)
    images = np.where(on, 0.9, 0.08) + noise * rng.standard_normal((n, d))
    np.clip(images, 0.0, 1.0, out=images)
    return Dataset(images, labels.astype(np.int64), f"synthetic-{classes}x{side}x{side}")


def normalize_sqrt_d(x: np.ndarray) -> np.ndarray:
    """Rescale x to l2 norm sqrt(d)."""
    x = np.asarray(x, dtype=np.float64)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return x * (math.sqrt(x.size) / nrm)


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        if value == math.inf:
            return "inf"
        return f"{value:.17g}"
    return str(value)


def write_csv(records, path, columns=None):
    """Write records (dicts or tuples) with a header row and fixed column order."""
    records = list(records)
    if columns is None:
        if not records:
            raise ValueError("columns required for an empty record list")
        columns = list(records[0].keys())
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(columns)
        for rec in records:
            if isinstance(rec, dict):
                w.writerow([_fmt(rec[c]) for c in columns])
            else:
                w.writerow([_fmt(v) for v in rec])


def read_csv(path):
    """Read a CSV written by write_csv: (columns, list of string rows)."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def write_config(doc: dict, path):
    doc = dict(doc)
    doc.setdefault("schema", CONFIG_SCHEMA)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_config(path) -> dict:
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"unparseable config {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    schema = doc.get("schema")
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"unknown config schema {schema!r} (expected {CONFIG_SCHEMA!r})")
    return doc


def norm_to_json(p):
    return "inf" if p == math.inf else int(p)


def norm_from_json(v):
    if v in ("inf", "Infinity"):
        return math.inf
    iv = int(v)
    if iv not in (1, 2):
        raise ConfigError(f"norm order must be 1, 2 or 'inf', got {v!r}")
    return iv
