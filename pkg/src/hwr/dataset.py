"""Dataset plumbing: manifests, train/test split, feature-matrix container.

The FMX1 container is binary and bit-exact: magic "FMX1", row and column
counts as little-endian uint32, then row-major float64 little-endian values.
Manifests are UTF-8 CSV files with header "path,label" and LF line endings;
paths resolve relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import labels as labels_mod

FMX_MAGIC = b"FMX1"


class ManifestError(ValueError):
    """Malformed manifest file."""


class FmxError(ValueError):
    """Malformed FMX1 container."""


@dataclass
class Manifest:
    records: list[tuple[str, int]]  # (relative path, class id)
    root: Path

    def __len__(self) -> int:
        return len(self.records)

    def paths(self) -> list[Path]:
        return [self.root / rel for rel, _ in self.records]

    def labels(self) -> np.ndarray:
        return np.array([cid for _, cid in self.records], dtype=np.intp)


def load_manifest(path: str | os.PathLike) -> Manifest:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest") from None
        if header != ["path", "label"]:
            raise ManifestError(f"{path}: expected header 'path,label', got {header}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or not row[0]:
                raise ManifestError(f"{path}: line {lineno}: expected 'path,label', got {row}")
            try:
                cid = int(row[1])
            except ValueError:
                raise ManifestError(f"{path}: line {lineno}: label {row[1]!r} is not an integer") from None
            try:
                labels_mod.label_to_unicode(cid)
            except ValueError as exc:
                raise ManifestError(f"{path}: line {lineno}: {exc}") from None
            records.append((row[0], cid))
    return Manifest(records=records, root=path.parent)


def write_manifest(manifest: Manifest, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "label"])
        writer.writerows(manifest.records)


@dataclass
class SplitResult:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    ratio: float


def split(n: int, ratio: float, seed: int) -> SplitResult:
    """Seeded uniform shuffle; first floor(ratio*n) indices train, rest test."""
    if n < 2:
        raise ValueError(f"need at least 2 samples to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(ratio * n)
    return SplitResult(
        train_indices=np.sort(perm[:n_train]),
        test_indices=np.sort(perm[n_train:]),
        seed=seed,
        ratio=ratio,
    )


def stratified_split(labels: np.ndarray, ratio: float, seed: int) -> SplitResult:
    """Per-class seeded shuffle keeping the train fraction within each class."""
    labels = np.asarray(labels, dtype=np.intp)
    if labels.shape[0] < 2:
        raise ValueError(f"need at least 2 samples to split, got {labels.shape[0]}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    gen = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        gen.shuffle(idx)
        cut = math.floor(ratio * idx.shape[0])
        train.extend(idx[:cut])
        test.extend(idx[cut:])
    return SplitResult(
        train_indices=np.sort(np.array(train, dtype=np.intp)),
        test_indices=np.sort(np.array(test, dtype=np.intp)),
        seed=seed,
        ratio=ratio,
    )


def write_fmx(matrix: np.ndarray, path: str | os.PathLike) -> None:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FmxError(f"matrix must be 2-D and nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FmxError("matrix contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(FMX_MAGIC)
        fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_fmx(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != FMX_MAGIC:
        raise FmxError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 12:
        raise FmxError(f"{path}: truncated header")
    rows, cols = struct.unpack("<II", data[4:12])
    expected = 12 + rows * cols * 8
    if len(data) != expected:
        raise FmxError(f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(data)}")
    if rows < 1 or cols < 1:
        raise FmxError(f"{path}: empty shape {rows}x{cols}")
    matrix = np.frombuffer(data[12:], dtype="<f8").reshape(rows, cols).astype(np.float64)
    if not np.all(np.isfinite(matrix)):
        raise FmxError(f"{path}: payload contains non-finite values")
    return matrix


def write_label_file(label_ids, path: str | os.PathLike) -> None:
    """Aligned label file: one class id per feature-matrix row."""
    arr = np.asarray(label_ids, dtype=np.intp)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.writelines(f"{int(v)}\n" for v in arr)


def read_label_file(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        values = [int(line) for line in fh if line.strip()]
    if not values:
        raise ValueError(f"{path}: no labels")
    return np.array(values, dtype=np.intp)
