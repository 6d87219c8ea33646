"""Walsh-Paley system: Walsh and Rademacher functions, Dirichlet and Fejér
kernels, and partial sums of Walsh-Fourier series.

Conventions (all on resolution-N grids):

    r_k(x)   = (-1)^{x_k}                      — k-th Rademacher function
    w_n      = Π_j r_j^{ε_j(n)}                — Walsh-Paley enumeration
    D_n      = Σ_{j<n} w_j                     — Dirichlet kernel, D_0 = 0
    n·K_n    = Σ_{k=1}^{n} D_k                 — Fejér numerator, 0·K_0 = 0
    S_n(f)   = Σ_{k<n} f̂(k) w_k               — partial sum

Dirichlet and Fejér kernels are built by accumulation; their closed forms
(e.g. D_{2^k} = 2^k·1_{[0,2^-k)}) stay available as independent checks.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grids import DyadicGrid
from .indexing import WalshIndex
from .transform import fwht, inverse_fwht, SpectrumVector


class FrequencyRangeError(ValueError):
    """Walsh frequency does not fit the grid resolution."""


# grids at or below this resolution are cheap enough to memoize (<= 0.5 MB)
_CACHE_MAX_RESOLUTION = 16


def _rademacher_raw(k: int, resolution: int) -> np.ndarray:
    if k >= resolution:
        raise FrequencyRangeError(
            f"rademacher index {k} needs resolution > {k}, got {resolution}"
        )
    half = 1 << (resolution - 1 - k)
    period = np.empty(2 * half)
    period[:half] = 1.0
    period[half:] = -1.0
    r = np.tile(period, 1 << k)
    r.setflags(write=False)
    return r


@lru_cache(maxsize=512)
def _rademacher_cached(k: int, resolution: int) -> np.ndarray:
    return _rademacher_raw(k, resolution)


def _rademacher_samples(k: int, resolution: int) -> np.ndarray:
    if resolution <= _CACHE_MAX_RESOLUTION:
        return _rademacher_cached(k, resolution)
    return _rademacher_raw(k, resolution)


def _walsh_raw(n: int, resolution: int) -> np.ndarray:
    if n >= 1 << resolution:
        raise FrequencyRangeError(
            f"walsh index {n} needs resolution > {n.bit_length() - 1}, "
            f"got {resolution}"
        )
    w = np.ones(1 << resolution)
    for j in WalshIndex(n).digits():
        w *= _rademacher_samples(j, resolution)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=4096)
def _walsh_cached(n: int, resolution: int) -> np.ndarray:
    return _walsh_raw(n, resolution)


def _walsh_samples(n: int, resolution: int) -> np.ndarray:
    if resolution <= _CACHE_MAX_RESOLUTION:
        return _walsh_cached(n, resolution)
    return _walsh_raw(n, resolution)


def rademacher(k: int, resolution: int) -> DyadicGrid:
    """r_k on a resolution-N grid (equals walsh(2^k, N))."""
    return DyadicGrid(resolution, _rademacher_samples(k, resolution),
                      label=f"rademacher({k})")


def walsh(n: int, resolution: int) -> DyadicGrid:
    """w_n on a resolution-N grid; requires n < 2^N."""
    n = int(WalshIndex(n))
    return DyadicGrid(resolution, _walsh_samples(n, resolution),
                      label=f"walsh({n})")


def dirichlet(n: int, resolution: int) -> DyadicGrid:
    """D_n = Σ_{j<n} w_j by direct accumulation; requires n <= 2^N."""
    if n < 0 or n > 1 << resolution:
        raise FrequencyRangeError(
            f"dirichlet order {n} out of range for resolution {resolution}"
        )
    acc = np.zeros(1 << resolution)
    for j in range(n):
        acc += _walsh_samples(j, resolution)
    return DyadicGrid(resolution, acc, label=f"dirichlet({n})")


def fejer_sum(n: int, resolution: int) -> DyadicGrid:
    """n·K_n = Σ_{k=1}^{n} D_k, accumulated; n = 0 gives the zero grid."""
    if n < 0 or n > 1 << resolution:
        raise FrequencyRangeError(
            f"fejer order {n} out of range for resolution {resolution}"
        )
    size = 1 << resolution
    d = np.zeros(size)
    acc = np.zeros(size)
    for k in range(1, n + 1):
        d += _walsh_samples(k - 1, resolution)
        acc += d
    return DyadicGrid(resolution, acc, label=f"fejer_sum({n})")


def fejer_kernel(n: int, resolution: int) -> DyadicGrid:
    """K_n = (1/n) Σ_{k=1}^{n} D_k; requires n >= 1."""
    if n < 1:
        raise ValueError(f"fejer kernel needs n >= 1, got {n}")
    return (1.0 / n) * fejer_sum(n, resolution)


@lru_cache(maxsize=8)
def fejer_table(resolution: int, count: int) -> np.ndarray:
    """Rows k = 0..count-1 of the Fejér numerators k·K_k, one accumulation pass.

    Shared by the kernel decomposition, which combines many k·K_k per call.
    """
    if count * (1 << resolution) > 1 << 28:
        raise MemoryError(
            f"fejer table {count} x 2^{resolution} would exceed the 2^28-element guard"
        )
    size = 1 << resolution
    table = np.zeros((count, size))
    d = np.zeros(size)
    for k in range(1, count):
        d += _walsh_samples(k - 1, resolution)
        table[k] = table[k - 1] + d
    table.setflags(write=False)
    return table


def _band_kernel_raw(k: int, resolution: int) -> np.ndarray:
    if k >= resolution:
        raise FrequencyRangeError(
            f"band index {k} needs resolution > {k}, got {resolution}"
        )
    out = np.zeros(1 << resolution)
    block = 1 << (resolution - k)
    out[:block] = float(1 << k) * _rademacher_samples(k, resolution)[:block]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def _band_kernel_cached(k: int, resolution: int) -> np.ndarray:
    return _band_kernel_raw(k, resolution)


def band_kernel_samples(k: int, resolution: int) -> np.ndarray:
    """r_k·D_{2^k}: the projection kernel onto Walsh band [2^k, 2^{k+1}).

    Built from the closed form (2^k·r_k on [0, 2^-k), zero elsewhere) so it
    stays usable at any scale; equality with the accumulated
    r_k·dirichlet(2^k) is a test oracle.
    """
    if resolution <= _CACHE_MAX_RESOLUTION:
        return _band_kernel_cached(k, resolution)
    return _band_kernel_raw(k, resolution)


def partial_sum(f: DyadicGrid, n: int) -> DyadicGrid:
    """S_n(f): spectral truncation to frequencies < n; 0 <= n <= 2^N."""
    if n < 0 or n > f.size:
        raise FrequencyRangeError(
            f"partial-sum order {n} out of range for resolution {f.resolution}"
        )
    coeffs = fwht(f).coefficients.copy()
    coeffs[n:] = 0.0
    return inverse_fwht(SpectrumVector(f.resolution, coeffs))
