"""Step functions on [0,1) sampled over dyadic intervals.

A grid of resolution N stores 2^N samples; samples[i] is the value on
[i·2^-N, (i+1)·2^-N).  With the dyadic expansion x = Σ_j x_j 2^-(j+1),
digit x_m of every point in interval i is bit (N-1-m) of i, so coarse
digits sit in the high bits of the sample index and dyadic addition of
points is XOR of indices.

The weak-L1 functional uses the convention

    ||f||_{1,inf} = max over distinct values v of |f| of v · |{|f| >= v}|,

which for step functions equals sup_λ λ·|{|f| > λ}| exactly (the sup over
λ < v of λ·|{|f| > λ}| is approached at each jump value v with the >=
measure).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .config import check_resolution


@dataclass(frozen=True)
class DyadicGrid:
    """Immutable sampled step function on [0,1)."""

    resolution: int
    samples: np.ndarray
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_resolution(self.resolution)
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.shape[0] != 1 << self.resolution:
            raise ValueError(
                f"expected 2^{self.resolution} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("grid samples must all be finite")
        samples = samples.copy() if samples is self.samples else samples
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_samples(cls, samples: Iterable[float], label: str | None = None) -> "DyadicGrid":
        arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples,
                         dtype=np.float64)
        n = arr.shape[0]
        if n < 1 or n & (n - 1):
            raise ValueError(f"sample count must be a power of two, got {n}")
        return cls(n.bit_length() - 1, arr, label)

    @classmethod
    def constant(cls, value: float, resolution: int) -> "DyadicGrid":
        return cls(resolution, np.full(1 << resolution, float(value)))

    @property
    def size(self) -> int:
        return 1 << self.resolution

    def values(self) -> np.ndarray:
        """Writable copy of the samples."""
        return np.array(self.samples)

    def integral(self) -> float:
        return float(self.samples.sum()) / self.size

    def _binary(self, other: "DyadicGrid | float", op) -> "DyadicGrid":
        if isinstance(other, DyadicGrid):
            if other.resolution != self.resolution:
                raise ValueError(
                    f"resolution mismatch: {self.resolution} vs {other.resolution}"
                )
            other = other.samples
        return DyadicGrid(self.resolution, op(self.samples, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply)

    def __neg__(self):
        return DyadicGrid(self.resolution, -self.samples)

    def __abs__(self):
        return DyadicGrid(self.resolution, np.abs(self.samples))


class GridNorms(NamedTuple):
    l1: float
    l2: float
    linf: float
    weak_l1: float


def norms(f: DyadicGrid) -> GridNorms:
    """(L1, L2, Linf, weak-L1) of a grid; all exact for step functions."""
    a = np.abs(f.samples)
    scale = 1.0 / f.size
    l1 = float(a.sum() * scale)
    l2 = float(np.sqrt((f.samples * f.samples).sum() * scale))
    linf = float(a.max()) if a.size else 0.0
    return GridNorms(l1, l2, linf, weak_l1(f))


def weak_l1(f: DyadicGrid) -> float:
    """max over distinct values v of |f| of v · measure{|f| >= v}."""
    a = np.abs(f.samples)
    vals, counts = np.unique(a, return_counts=True)
    if vals[0] == 0.0 and vals.size == 1:
        return 0.0
    # counts of samples >= v, for v running over ascending unique values
    ge_counts = counts[::-1].cumsum()[::-1]
    return float(np.max(vals * ge_counts) / f.size)


def distribution_scan(f: DyadicGrid) -> list[tuple[float, float]]:
    """(v, v·measure{|f| >= v}) for every distinct nonzero value v of |f|."""
    a = np.abs(f.samples)
    vals, counts = np.unique(a, return_counts=True)
    ge = counts[::-1].cumsum()[::-1]
    scale = 1.0 / f.size
    return [(float(v), float(v * c * scale)) for v, c in zip(vals, ge) if v > 0.0]


def write_grid_csv(f: DyadicGrid, path: str | Path) -> None:
    """Write the grid file format: header ``index,value``, 2^N ascending rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "value"])
        for i, v in enumerate(f.samples):
            writer.writerow([i, repr(float(v))])


def read_grid_csv(path: str | Path, label: str | None = None) -> DyadicGrid:
    """Read the grid file format; rejects gaps, duplicates, and bad lengths."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["index", "value"]:
            raise ValueError(f"{path}: expected header 'index,value', got {header}")
        values: list[float] = []
        for expected, row in enumerate(reader):
            if len(row) != 2:
                raise ValueError(f"{path}: malformed row {row!r}")
            idx = int(row[0])
            if idx != expected:
                kind = "duplicate or out-of-order" if idx < expected else "gap in"
                raise ValueError(f"{path}: {kind} indices at row {expected} (got {idx})")
            values.append(float(row[1]))
    n = len(values)
    if n < 1 or n & (n - 1):
        raise ValueError(f"{path}: row count {n} is not a power of two")
    return DyadicGrid.from_samples(np.array(values), label)
