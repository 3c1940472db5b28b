"""Datasets, splits and deterministic random streams."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class UnsupportedModelError(Exception):
    """A metric needs information the model cannot provide."""


class UndefinedScoreError(Exception):
    """A metric is mathematically undefined for this model and data."""


class SelectionError(Exception):
    """No candidate model could be scored under a metric."""


def _frozen(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Covariates ``X`` (n x d), treatment ``w`` in {0, 1} and outcome ``y``."""

    X: np.ndarray
    w: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        w = np.asarray(self.w)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2 or w.ndim != 1 or y.ndim != 1:
            raise ValueError("X must be 2-d, w and y 1-d")
        n, d = X.shape
        if n < 1 or d < 1:
            raise ValueError("dataset needs at least one row and one column")
        if w.shape[0] != n or y.shape[0] != n:
            raise ValueError(f"length mismatch: X has {n} rows, w {w.shape[0]}, y {y.shape[0]}")
        if not np.all((w == 0) | (w == 1)):
            raise ValueError("treatment entries must be exactly 0 or 1")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("X and y must be finite")
        object.__setattr__(self, "X", _frozen(X, np.float64))
        object.__setattr__(self, "w", _frozen(w, np.int64))
        object.__setattr__(self, "y", _frozen(y, np.float64))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def arm(self, value: int) -> np.ndarray:
        """Row indices with ``w == value``."""
        return np.flatnonzero(self.w == value)


@dataclass(frozen=True, eq=False)
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray


class RandomStream:
    """Seed plus a hierarchical path naming what the randomness is for.

    The path is hashed into the spawn key of a :class:`numpy.random.SeedSequence`,
    so each distinct path gets an independent stream no matter which
    process or in what order it is requested.
    """

    def __init__(self, seed: int, path: Sequence[str | int] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(str(p) for p in path)

    def child(self, *parts) -> "RandomStream":
        return RandomStream(self.seed, self.path + tuple(str(p) for p in parts))

    def _spawn_key(self) -> tuple[int, ...]:
        key = []
        for part in self.path:
            digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
            key.append(int.from_bytes(digest, "little"))
        return tuple(key)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self._spawn_key())
        return np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RandomStream({self.seed}, {'/'.join(self.path) or '<root>'})"


def make_splits(n: int, sizes: Sequence[int], stream: RandomStream) -> SplitIndices:
    """Uniformly random partition of ``range(n)`` into train/validation/test.

    Indices within each part are sorted so rows keep their original order.
    """
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 3:
        raise ValueError("sizes must be a triple")
    if any(s < 1 for s in sizes):
        raise ValueError(f"every split size must be >= 1, got {sizes}")
    if sum(sizes) != n:
        raise ValueError(f"split sizes {sizes} do not sum to n={n}")
    perm = stream.generator().permutation(n)
    a, b = sizes[0], sizes[0] + sizes[1]
    parts = [np.sort(perm[:a]), np.sort(perm[a:b]), np.sort(perm[b:])]
    return SplitIndices(*(_frozen(p, np.intp) for p in parts))


def subset(data: Dataset, idx) -> Dataset:
    idx = np.asarray(idx, dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= data.n):
        raise ValueError(f"index out of range for dataset of {data.n} rows")
    return Dataset(data.X[idx], data.w[idx], data.y[idx])


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path, data: Dataset, extra: dict[str, np.ndarray] | None = None) -> None:
    """Write ``x1..xd,w,y`` plus any ``extra`` columns at full precision."""
    extra = extra or {}
    header = [f"x{j + 1}" for j in range(data.d)] + ["w", "y"] + list(extra)
    cols = [data.X[:, j] for j in range(data.d)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(data.n):
            row = [_fmt(c[i]) for c in cols]
            row += [str(int(data.w[i])), _fmt(data.y[i])]
            row += [_fmt(v[i]) for v in extra.values()]
            writer.writerow(row)


def read_csv(path) -> tuple[Dataset, dict[str, np.ndarray]]:
    """Inverse of :func:`write_csv`; unknown trailing columns come back as ``extra``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader]
    table = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    xcols = [j for j, h in enumerate(header) if h.startswith("x") and h[1:].isdigit()]
    wi, yi = header.index("w"), header.index("y")
    extra = {h: table[:, j] for j, h in enumerate(header) if j not in xcols and j not in (wi, yi)}
    return Dataset(table[:, xcols], table[:, wi].astype(np.int64), table[:, yi]), extra


def ensure_writable_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    probe = p / ".write_probe"
    probe.write_text("")
    probe.unlink()
    return p
