"""Datasets: CSV I/O, synthetic mixtures and clustering accuracy."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    ConfigError,
    DataError,
    EmptyFileError,
    MissingFileError,
    NonNumericCellError,
    RaggedRowError,
)

SHAPES = ("gaussian", "uniform-box")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def compact_labels(labels) -> np.ndarray:
    """Map arbitrary integer class ids onto 1..L, preserving their order."""
    labels = np.asarray(labels)
    _, inverse = np.unique(labels, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64) + 1


@dataclass(frozen=True)
class Dataset:
    """An ``n x p`` matrix of points with optional integer class labels.

    Labels are compacted to ``1..L`` on construction. Arrays are made
    read-only so a dataset can be shared freely.
    """

    points: np.ndarray
    labels: np.ndarray | None = None
    name: str = "data"

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DataError(f"points must be a 2-D array, got shape {pts.shape}")
        n, p = pts.shape
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 points with p >= 1 coordinates, got {n}x{p}")
        if not np.all(np.isfinite(pts)):
            raise DataError("points contain non-finite coordinates")
        object.__setattr__(self, "points", _readonly(pts))
        if self.labels is not None:
            lab = np.asarray(self.labels).reshape(-1)
            if lab.shape[0] != n:
                raise DataError(f"{lab.shape[0]} labels for {n} points")
            if lab.dtype.kind == "f":
                if not np.all(np.isfinite(lab)) or np.any(lab != np.round(lab)):
                    raise DataError("labels must be integers")
            elif lab.dtype.kind not in "iu":
                raise DataError("labels must be integers")
            object.__setattr__(self, "labels", _readonly(compact_labels(lab)))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    @property
    def n_classes(self) -> int | None:
        return None if self.labels is None else int(self.labels.max())

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def load_csv(path, label_column: str | int | None = None, name: str | None = None) -> Dataset:
    """Read a comma-separated file into a :class:`Dataset`.

    A first row whose cells are all non-numeric is taken as a header.
    ``label_column`` is a header name, or a 1-based column index when the
    file has no header. Row and column numbers in errors are 1-based file
    positions.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFileError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1)
                if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyFileError(f"{path} is empty")

    header = None
    first = [c.strip() for c in rows[0][1]]
    if all(_parse_float(c) is None for c in first):
        header = first
        rows = rows[1:]
        if not rows:
            raise EmptyFileError(f"{path} has a header but no data rows")

    width = len(header) if header is not None else len(rows[0][1])
    label_idx = None
    if label_column is not None:
        if header is not None and isinstance(label_column, str):
            if label_column not in header:
                raise DataError(f"label column {label_column!r} not in header {header}")
            label_idx = header.index(label_column)
        else:
            try:
                label_idx = int(label_column) - 1
            except ValueError:
                raise DataError(f"file has no header; label column {label_column!r} must be a 1-based index")
            if not 0 <= label_idx < width:
                raise DataError(f"label column index {label_column} out of range 1..{width}")

    values = np.empty((len(rows), width))
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise RaggedRowError(lineno, width, len(cells))
        for c, cell in enumerate(cells):
            v = _parse_float(cell.strip())
            if v is None:
                raise NonNumericCellError(lineno, c + 1, cell)
            values[r, c] = v

    labels = None
    if label_idx is not None:
        labels = values[:, label_idx]
        values = np.delete(values, label_idx, axis=1)
    if values.shape[1] == 0:
        raise DataError(f"{path} has no feature columns")
    return Dataset(values, labels, name or os.path.splitext(os.path.basename(path))[0])


def write_csv(dataset: Dataset, path) -> None:
    """Write ``dataset`` with a header row; floats are written at full precision."""
    header = [f"x{j + 1}" for j in range(dataset.p)]
    if dataset.labels is not None:
        header.append("label")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.points[i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            w.writerow(row)


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    center: tuple[float, ...]
    spread: tuple[float, ...]
    shape: str = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        spread = tuple(float(s) for s in np.broadcast_to(self.spread, len(self.center)))
        object.__setattr__(self, "spread", spread)
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown component shape {self.shape!r}; expected one of {SHAPES}")
        if not self.weight > 0:
            raise ConfigError(f"component weight must be positive, got {self.weight}")
        if not all(s > 0 for s in self.spread):
            raise ConfigError(f"component spreads must be positive, got {self.spread}")
        if not self.center:
            raise ConfigError("component center must have at least one coordinate")


@dataclass(frozen=True)
class MixtureSpec:
    """A finite mixture of Gaussian or uniform-box components.

    For ``uniform-box`` components the spread is the half-width per axis.
    """

    components: tuple[MixtureComponent, ...]
    total_n: int
    seed: int = 0
    name: str = field(default="mixture", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ConfigError("mixture needs at least one component")
        dims = {len(c.center) for c in self.components}
        if len(dims) != 1:
            raise ConfigError(f"components disagree on dimension: {sorted(dims)}")
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"component weights sum to {total}, expected 1")
        if self.total_n < len(self.components):
            raise ConfigError(f"total_n={self.total_n} is smaller than the number of components")

    def counts(self) -> np.ndarray:
        """Per-component point counts by largest remainder (each at least 1)."""
        w = np.array([c.weight for c in self.components])
        extra = self.total_n - len(w)
        raw = w * extra
        counts = np.floor(raw).astype(np.int64)
        short = extra - counts.sum()
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
        return counts + 1


def generate_mixture(spec: MixtureSpec) -> Dataset:
    """Sample a labelled dataset from ``spec``; a pure function of the spec."""
    rng = np.random.default_rng(spec.seed)
    blocks, labels = [], []
    for j, (comp, count) in enumerate(zip(spec.components, spec.counts()), start=1):
        center = np.asarray(comp.center)
        spread = np.asarray(comp.spread)
        if comp.shape == "gaussian":
            noise = rng.standard_normal((count, center.size))
        else:
            noise = rng.uniform(-1.0, 1.0, (count, center.size))
        blocks.append(center + spread * noise)
        labels.append(np.full(count, j))
    return Dataset(np.vstack(blocks), np.concatenate(labels), spec.name)


def clustering_accuracy(labels: Sequence[int], assignments: Sequence[int]) -> float:
    """Best fraction of points matched under a one-to-one class/cluster pairing.

    The pairing maximises the matched count over the contingency table
    (Hungarian algorithm); surplus classes or clusters stay unmatched.
    """
    labels = np.asarray(labels).reshape(-1)
    assignments = np.asarray(assignments).reshape(-1)
    if labels.size != assignments.size:
        raise DataError(f"length mismatch: {labels.size} labels, {assignments.size} assignments")
    if labels.size == 0:
        raise DataError("empty input")
    a = compact_labels(labels) - 1
    b = compact_labels(assignments) - 1
    table = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / labels.size
