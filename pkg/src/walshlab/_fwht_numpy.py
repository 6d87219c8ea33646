"""Pure-NumPy Walsh-Hadamard butterfly (fallback backend)."""
from __future__ import annotations

import numpy as np


def hadamard_inplace(a: np.ndarray) -> np.ndarray:
    """In-place natural-order Hadamard transform: out[m] = Σ_i (-1)^{popcount(m&i)} a[i].

    Length must be a power of two.  O(N·2^N) via the standard butterfly,
    vectorized one stage at a time.
    """
    n = a.shape[0]
    h = 1
    while h < n:
        view = a.reshape(-1, 2, h)
        x = view[:, 0, :].copy()
        y = view[:, 1, :]
        np.add(x, y, out=view[:, 0, :])
        np.subtract(x, y, out=view[:, 1, :])
        h <<= 1
    return a
