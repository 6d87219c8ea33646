"""Fast Walsh-Hadamard transform in Walsh-Paley ordering, and XOR convolution.

Normalization: coefficient n of a grid f is f̂(n) = 2^-N Σ_i f_i w_n(x_i),
the integral of f against the n-th Walsh-Paley function.  Because coarse
dyadic digits sit in the HIGH bits of the sample index (see grids), the
Paley coefficient order is the bit-reversal of the natural Hadamard output
order: f̂(n) = 2^-N (H f)[rev_N(n)].

The butterfly itself is backend-dispatched: a compiled Cython kernel when
the extension built, else a vectorized NumPy fallback.  Select explicitly
with WALSHLAB_BACKEND=cython|numpy.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _fwht_numpy
from .config import check_resolution
from .grids import DyadicGrid

_BACKENDS: dict[str, object] = {"numpy": _fwht_numpy.hadamard_inplace}
try:  # compiled extension is optional
    from . import _fwht_cy

    _BACKENDS["cython"] = _fwht_cy.hadamard_inplace
except ImportError:
    pass

_active = os.environ.get("WALSHLAB_BACKEND", "auto")
if _active == "auto":
    _active = "cython" if "cython" in _BACKENDS else "numpy"
if _active not in _BACKENDS:
    raise ImportError(
        f"requested backend {_active!r} unavailable (have {sorted(_BACKENDS)})"
    )


def active_backend() -> str:
    return _active


def use_backend(name: str) -> None:
    """Switch the butterfly implementation (mainly for benchmarks/tests)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r} (have {sorted(_BACKENDS)})")
    _active = name


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def hadamard_inplace(a: np.ndarray) -> np.ndarray:
    """Natural-order Hadamard transform, in place, via the active backend."""
    return _BACKENDS[_active](a)


@lru_cache(maxsize=32)
def bit_reverse_permutation(bits: int) -> np.ndarray:
    """rev_N as an index array; cached, read-only."""
    idx = np.arange(1 << bits, dtype=np.int64)
    rev = np.zeros_like(idx)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.setflags(write=False)
    return rev


@dataclass(frozen=True)
class SpectrumVector:
    """Walsh-Fourier coefficients of a resolution-N grid: entry n is f̂(n)."""

    resolution: int
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        check_resolution(self.resolution)
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.shape[0] != 1 << self.resolution:
            raise ValueError(
                f"expected 2^{self.resolution} coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def size(self) -> int:
        return 1 << self.resolution


def fwht(f: DyadicGrid) -> SpectrumVector:
    """Walsh-Fourier coefficients of f, O(N·2^N)."""
    t = hadamard_inplace(f.values())
    coeffs = t[bit_reverse_permutation(f.resolution)]
    coeffs *= 1.0 / f.size
    return SpectrumVector(f.resolution, coeffs)


def inverse_fwht(spectrum: SpectrumVector) -> DyadicGrid:
    """Reconstruct the grid: f(x_i) = Σ_n f̂(n) w_n(x_i)."""
    perm = spectrum.coefficients[bit_reverse_permutation(spectrum.resolution)]
    return DyadicGrid(spectrum.resolution, hadamard_inplace(perm))


def xor_convolve(f: DyadicGrid, g: DyadicGrid) -> DyadicGrid:
    """Convolution over the dyadic group: (f*g)[i] = 2^-N Σ_j f[i XOR j] g[j].

    Computed through the Hadamard domain, where it is diagonal; the
    bit-reversal cancels between the two transforms.
    """
    if f.resolution != g.resolution:
        raise ValueError(
            f"resolution mismatch: {f.resolution} vs {g.resolution}"
        )
    hf = hadamard_inplace(f.values())
    hg = hadamard_inplace(g.values())
    hf *= hg
    out = hadamard_inplace(hf)
    out *= 1.0 / (f.size * f.size)
    return DyadicGrid(f.resolution, out)


def xor_convolve_direct(f: DyadicGrid, g: DyadicGrid) -> DyadicGrid:
    """Quadratic double-loop convolution; independent oracle for the fast path."""
    if f.resolution != g.resolution:
        raise ValueError(
            f"resolution mismatch: {f.resolution} vs {g.resolution}"
        )
    n = f.size
    idx = np.arange(n)
    out = np.empty(n)
    for i in range(n):
        out[i] = f.samples[i ^ idx] @ g.samples
    return DyadicGrid(f.resolution, out / n)
