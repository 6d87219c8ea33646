"""Dyadic martingale operators and the weighted Walsh-Carleson machinery.

E_k is conditional expectation with respect to the rank-k dyadic σ-algebra
(averaging over dyadic intervals of length 2^-k), and the martingale
difference is 𝓔_k = E_{k+1} - E_k, band-limited to Walsh frequencies
[2^k, 2^{k+1}).

The central operators, for a weight family Ω with values Ω_k(n):

    M_n(Ω)f   = Σ_k ε_k(n) Ω_k(n) 𝓔_k(f·w_n)       — martingale transform
    P_n(Ω)    = Σ_k ε_k(n) Ω_k(n) r_k D_{2^k}       — its convolution kernel
    W_C(Ω,S)f = sup_{n in S} |M_n(Ω)f|              — Carleson-type maximal op

so that M_n(Ω)f = (f·w_n) * P_n(Ω), and with Ω ≡ 1 the Paley identity
S_n(f) = w_n·M_n(1)f holds.

Weight arguments accept either a WeightFamily (anything with .omega(k, n))
or a plain callable (k, n) -> float.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .grids import DyadicGrid, write_grid_csv
from .indexing import WalshIndex
from .kernels import _walsh_samples, band_kernel_samples

WeightLike = Callable[[int, int], float]


def _omega_fn(weights) -> WeightLike:
    fn = getattr(weights, "omega", weights)
    if not callable(fn):
        raise TypeError(f"weights must be callable or have .omega, got {weights!r}")
    return fn


def _weight_id(weights) -> str:
    return getattr(weights, "id", getattr(weights, "__name__", repr(weights)))


def cond_exp(f: DyadicGrid, k: int) -> DyadicGrid:
    """E_k f: average over rank-k dyadic blocks; E_0 = mean, E_N = identity."""
    if not 0 <= k <= f.resolution:
        raise ValueError(f"rank {k} out of range 0..{f.resolution}")
    return DyadicGrid(f.resolution, _cond_exp_samples(f.samples, k))


def _cond_exp_samples(samples: np.ndarray, k: int) -> np.ndarray:
    n = samples.shape[0]
    block = n >> k
    if block == 1:
        return samples.copy()
    means = samples.reshape(-1, block).mean(axis=1)
    return np.repeat(means, block)


def mdiff(f: DyadicGrid, k: int) -> DyadicGrid:
    """𝓔_k f = E_{k+1} f - E_k f; spectrum in [2^k, 2^{k+1}); 0 <= k <= N-1."""
    if not 0 <= k <= f.resolution - 1:
        raise ValueError(f"difference rank {k} out of range 0..{f.resolution - 1}")
    return DyadicGrid(
        f.resolution,
        _cond_exp_samples(f.samples, k + 1) - _cond_exp_samples(f.samples, k),
    )


def doob_max(f: DyadicGrid) -> DyadicGrid:
    """E*(f) = max_{0<=k<=N} |E_k f| pointwise."""
    out = np.abs(_cond_exp_samples(f.samples, 0))
    for k in range(1, f.resolution + 1):
        np.maximum(out, np.abs(_cond_exp_samples(f.samples, k)), out=out)
    return DyadicGrid(f.resolution, out)


def square_function(f: DyadicGrid, include_mean: bool = True) -> DyadicGrid:
    """S(f) = (|E_0 f|^2 + Σ_{k=1}^{N} |E_k f - E_{k-1} f|^2)^{1/2}.

    The |E_0 f| term makes the induced H_1 functional a norm (it would
    otherwise annihilate constants); pass include_mean=False for the strict
    band-only sum.
    """
    prev = _cond_exp_samples(f.samples, 0)
    acc = prev * prev if include_mean else np.zeros_like(prev)
    for k in range(1, f.resolution + 1):
        cur = _cond_exp_samples(f.samples, k)
        d = cur - prev
        acc += d * d
        prev = cur
    return DyadicGrid(f.resolution, np.sqrt(acc))


def h1_norm(f: DyadicGrid, include_mean: bool = True) -> float:
    """Dyadic Hardy-space functional ||S(f)||_1."""
    return square_function(f, include_mean).integral()


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing, nonempty list of positive Walsh indices."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(v) for v in self.indices)
        if not idx:
            raise ValueError("index set must be nonempty")
        if idx[0] < 1 or any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing positive integers")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, values: Iterable[int]) -> "IndexSet":
        return cls(tuple(sorted(set(int(v) for v in values))))

    @classmethod
    def full_range(cls, resolution: int) -> "IndexSet":
        return cls(tuple(range(1, 1 << resolution)))

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def max(self) -> int:
        return self.indices[-1]


@dataclass(frozen=True)
class TransformResult:
    """Output grid of M_n(Ω) or W_C(Ω,S) plus the provenance needed to rerun it."""

    grid: DyadicGrid
    operator: str
    weight_id: str
    n: int | None = None
    index_set: tuple[int, ...] | None = None

    @property
    def resolution(self) -> int:
        return self.grid.resolution

    def sidecar(self) -> dict:
        meta: dict = {
            "operator": self.operator,
            "weights": self.weight_id,
            "resolution": self.resolution,
        }
        if self.n is not None:
            meta["n"] = self.n
        if self.index_set is not None:
            meta["index_set"] = list(self.index_set)
        return meta

    def write(self, base_path: str | Path) -> tuple[Path, Path]:
        """Write <base>.csv (grid) and <base>.json (sidecar)."""
        base = Path(base_path)
        csv_path = base.with_suffix(".csv")
        json_path = base.with_suffix(".json")
        write_grid_csv(self.grid, csv_path)
        json_path.write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _mtransform_samples(samples: np.ndarray, n: int, resolution: int,
                        omega: WeightLike) -> np.ndarray:
    g = samples * _walsh_samples(n, resolution)
    out = np.zeros_like(samples)
    for k in WalshIndex(n).digits():
        out += omega(k, n) * (
            _cond_exp_samples(g, k + 1) - _cond_exp_samples(g, k)
        )
    return out


def mtransform(f: DyadicGrid, n: int, weights) -> TransformResult:
    """Martingale transform M_n(Ω)f = Σ_k ε_k(n) Ω_k(n) 𝓔_k(f·w_n); 1 <= n < 2^N."""
    n = int(n)
    if not 1 <= n < f.size:
        raise ValueError(f"need 1 <= n < 2^{f.resolution}, got {n}")
    out = _mtransform_samples(f.samples, n, f.resolution, _omega_fn(weights))
    return TransformResult(
        grid=DyadicGrid(f.resolution, out),
        operator="mtransform",
        weight_id=_weight_id(weights),
        n=n,
    )


def carleson_kernel(n: int, weights, resolution: int) -> DyadicGrid:
    """P_n(Ω) = Σ_k ε_k(n) Ω_k(n) r_k D_{2^k}; spectrum is Ω_k(n) on the
    bands [2^k, 2^{k+1}) selected by the digits of n."""
    n = int(n)
    if not 1 <= n < (1 << resolution):
        raise ValueError(f"need 1 <= n < 2^{resolution}, got {n}")
    omega = _omega_fn(weights)
    acc = np.zeros(1 << resolution)
    for k in WalshIndex(n).digits():
        acc += omega(k, n) * band_kernel_samples(k, resolution)
    return DyadicGrid(resolution, acc, label=f"carleson_kernel({n})")


def carleson_max(f: DyadicGrid, weights, index_set) -> TransformResult:
    """W_C(Ω,{n_a})f = sup over the index set of |M_n(Ω)f|, pointwise.

    Iterates n ascending with a running max: O(|S|·N·2^N) time, O(2^N) memory.
    """
    if not isinstance(index_set, IndexSet):
        index_set = IndexSet.of(index_set)
    if index_set.max >= f.size:
        raise ValueError(
            f"index {index_set.max} out of range for resolution {f.resolution}"
        )
    omega = _omega_fn(weights)
    out = np.zeros_like(f.samples)
    for n in index_set:
        np.maximum(
            out,
            np.abs(_mtransform_samples(f.samples, n, f.resolution, omega)),
            out=out,
        )
    return TransformResult(
        grid=DyadicGrid(f.resolution, out),
        operator="carleson_max",
        weight_id=_weight_id(weights),
        index_set=index_set.indices,
    )


def mtransform_dependence_set(n: int) -> list[tuple[int, int]]:
    """Half-open frequency intervals f̂ must be known on to determine M_n(Ω)f.

    For each set digit k of n the transform reads f̂ at frequencies agreeing
    with n above position k and free below: [n^{(k+1)}, n^{(k+1)} + 2^k).
    With Ω ≡ 1 these tile [0, n), matching S_n.
    """
    idx = WalshIndex(n)
    return [(idx.upper(k + 1), idx.upper(k + 1) + (1 << k)) for k in idx.digits()]


def ones_weight(k: int, n: int) -> float:
    """The unweighted case Ω ≡ 1 (Paley / classical Walsh-Carleson)."""
    return 1.0


ones_weight.id = "ones"  # type: ignore[attr-defined]
