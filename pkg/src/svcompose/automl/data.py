"""Datasets (numeric features + categorical labels) and stratified splitting."""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path


class DatasetError(Exception):
    pass


@dataclass
class Dataset:
    features: list[list[float]]
    labels: list[str]
    name: str = ""

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise DatasetError("features and labels disagree on length")
        if self.n < 2:
            raise DatasetError("a dataset needs at least 2 instances")
        widths = {len(row) for row in self.features}
        if len(widths) > 1:
            raise DatasetError(f"ragged feature rows: widths {sorted(widths)}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return len(self.features[0]) if self.features else 0

    @property
    def classes(self) -> list[str]:
        seen: dict[str, None] = {}
        for y in self.labels:
            seen.setdefault(y)
        return list(seen)

    def subset(self, indices: list[int], name: str = "") -> "Dataset":
        return Dataset([self.features[i] for i in indices], [self.labels[i] for i in indices],
                       name or self.name)


def load_dataset(path) -> Dataset:
    """CSV with a header row; the last column is the label, the rest numeric."""
    path = Path(path)
    features: list[list[float]] = []
    labels: list[str] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file")
        if len(header) < 2:
            raise DatasetError(f"{path}: need at least one feature column and the label column")
        for r, row in enumerate(reader, start=2):  # header is line 1
            if len(row) != len(header):
                raise DatasetError(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
            values = []
            for c, cell in enumerate(row[:-1], start=1):
                cell = cell.strip()
                try:
                    x = float(cell)
                except ValueError:
                    raise DatasetError(f"{path}: row {r}, column {c}: non-numeric cell {cell!r}")
                if math.isnan(x):
                    raise DatasetError(f"{path}: row {r}, column {c}: missing value")
                values.append(x)
            label = row[-1].strip()
            if not label:
                raise DatasetError(f"{path}: row {r}: empty label")
            features.append(values)
            labels.append(label)
    ds = Dataset(features, labels, name=path.stem)
    if len(ds.classes) < 2:
        raise DatasetError(f"{path}: dataset has a single class")
    return ds


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    stratified: bool = True
    seed: int = 0


def split_indices(labels: list[str], spec: SplitSpec) -> tuple[list[int], list[int]]:
    """Deterministic stratified train/validation index sets.

    Per-class train counts are round(fraction * class size), clamped so both
    parts keep at least one instance of every class. Classes with a single
    instance cannot be split.
    """
    groups: dict[str, list[int]] = {}
    for i, y in enumerate(labels):
        groups.setdefault(y, []).append(i)
    rng = random.Random(spec.seed)
    train: list[int] = []
    val: list[int] = []
    for y, indices in groups.items():
        if len(indices) < 2:
            raise DatasetError(f"class {y!r} has a single instance and cannot be split")
        order = list(indices)
        if spec.stratified:
            rng.shuffle(order)
        take = int(math.floor(spec.train_fraction * len(order) + 0.5))
        take = max(1, min(len(order) - 1, take))
        train.extend(order[:take])
        val.extend(order[take:])
    return sorted(train), sorted(val)


def stratified_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    train_idx, val_idx = split_indices(ds.labels, spec)
    return ds.subset(train_idx, f"{ds.name}:train"), ds.subset(val_idx, f"{ds.name}:validation")
