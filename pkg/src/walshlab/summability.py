"""Summability matrices, their means, kernels, tail sums, and the three-part
kernel decomposition.

A matrix 𝕋 = (t_{k,n}) is assumed nonnegative, rowwise nondecreasing in k
(except possibly at k = n when flagged), and row-stochastic.  It acts as

    𝒯_n(f) = Σ_{k=1}^{n} t_{k,n} S_k(f) = f * V_n,     V_n = Σ_k t_{k,n} D_k,

and acts diagonally on Walsh functions: 𝒯_n(w_l) = T_n^{(l+1)} w_l, where
T_n^{(m)} = Σ_{l=m}^{n} t_{l,n}.  Tail quantities near the top of a row:

    T̃_{m,n} = Σ_{l=0}^{m-1} t_{n-l,n} = T_n^{(n-m+1)},   Ω_s(n) = T̃_{2^s,n}.

Built-in families: partial sums, de la Vallée Poussin, Cesàro with varying
parameter, Nörlund logarithmic, and general Nörlund means.  Each family has
a closed-form T̃ (used by large-n scans and the boundedness index) that is
cross-validated against explicit suffix accumulation in the test suite.

Means are evaluated spectrally through the eigenrelation (O(N·2^N)); the
kernel V_n is accumulated from Dirichlet kernels, which keeps the two
routes independent (their agreement is an acceptance test).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .grids import DyadicGrid, norms
from .indexing import WalshIndex
from .kernels import FrequencyRangeError, _walsh_samples, band_kernel_samples, fejer_table
from .transform import SpectrumVector, fwht, inverse_fwht

EULER_GAMMA = 0.5772156649015329

_HARMONIC_TABLE_SIZE = 1 << 16
_harmonic_table = np.concatenate(
    [[0.0], np.cumsum(1.0 / np.arange(1, _HARMONIC_TABLE_SIZE + 1))]
)


def harmonic_number(m: int) -> float:
    """H_m = Σ_{j=1}^{m} 1/j; tabulated below 2^16, digamma series above."""
    if m < 0:
        raise ValueError(f"harmonic number needs m >= 0, got {m}")
    if m <= _HARMONIC_TABLE_SIZE:
        return float(_harmonic_table[m])
    x = m + 1.0
    inv2 = 1.0 / (x * x)
    psi = math.log(x) - 0.5 / x - inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 / 252))
    return EULER_GAMMA + psi


def a_number(m: int, beta: float) -> float:
    """Cesàro number A_m^β = (β+1)···(β+m)/m!, log-space for stability."""
    if m < 0:
        raise ValueError(f"A-number needs m >= 0, got {m}")
    if beta == 1.0:
        return float(m + 1)
    if beta == 0.0:
        return 1.0
    return math.exp(
        math.lgamma(beta + m + 1) - math.lgamma(beta + 1) - math.lgamma(m + 1)
    )


class MatrixParameterError(ValueError):
    """Summability-matrix parameters violate the family's preconditions."""


class SummabilityMatrix:
    """Base class; subclasses provide rows and (optionally) closed-form tails."""

    id: str = "abstract"
    monotone_except_last: bool = False

    def row(self, n: int) -> np.ndarray:
        """Entries t_{k,n} for k = 0..n (read-only array)."""
        if n < 1:
            raise ValueError(f"row index must be >= 1, got {n}")
        r = self._row(n)
        r.setflags(write=False)
        return r

    def _row(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def entry(self, k: int, n: int) -> float:
        if not 0 <= k <= n:
            raise ValueError(f"entry index {k} out of row range 0..{n}")
        return float(self.row(n)[k])

    def tilde_tail(self, m: int, n: int) -> float:
        """T̃_{m,n} = Σ_{l=0}^{m-1} t_{n-l,n}; closed form where the family has one."""
        if not 0 <= m <= n + 1:
            raise ValueError(f"tail length {m} out of range 0..{n + 1}")
        row = self.row(n)
        return float(row[n - m + 1:].sum())

    def suffix_sum(self, m: int, n: int) -> float:
        """T_n^{(m)} = Σ_{l=m}^{n} t_{l,n}."""
        if not 0 <= m <= n + 1:
            raise ValueError(f"suffix start {m} out of range 0..{n + 1}")
        return self.tilde_tail(n - m + 1, n)

    def omega(self, s: int, n: int) -> float:
        """Induced dyadic-scale weight Ω_s(n) = T̃_{2^s,n}."""
        return self.tilde_tail(min(1 << s, n + 1), n)

    def validate_row(self, n: int, tol: float = 1e-12) -> None:
        """Check nonnegativity, rowwise monotonicity, and unit row sum."""
        row = self.row(n)
        if np.any(row < 0):
            raise MatrixParameterError(f"{self.id}: negative entry in row {n}")
        diffs = np.diff(row)
        stop = len(diffs) - 1 if self.monotone_except_last else len(diffs)
        if np.any(diffs[:stop] < -tol * max(1.0, np.abs(row).max())):
            raise MatrixParameterError(f"{self.id}: row {n} not nondecreasing")
        s = float(row.sum())
        if abs(s - 1.0) > tol:
            raise MatrixParameterError(f"{self.id}: row {n} sums to {s}, not 1")


class PartialSumMatrix(SummabilityMatrix):
    """t_{k,n} = 1 at k = n, else 0, so 𝒯_n = S_n."""

    id = "partial_sum"

    def _row(self, n: int) -> np.ndarray:
        r = np.zeros(n + 1)
        r[n] = 1.0
        return r

    def tilde_tail(self, m: int, n: int) -> float:
        if not 0 <= m <= n + 1:
            raise ValueError(f"tail length {m} out of range 0..{n + 1}")
        return 1.0 if m >= 1 else 0.0


class ValleePoussinMatrix(SummabilityMatrix):
    """De la Vallée Poussin means: averages of the last λ_n + 1 partial sums."""

    def __init__(self, lam: Callable[[int], int], tag: str = "lambda"):
        self.lam = lam
        self.id = f"vallee_poussin({tag})"

    def _lambda(self, n: int) -> int:
        lam = int(self.lam(n))
        if not 1 <= lam <= n:
            raise MatrixParameterError(
                f"{self.id}: need 1 <= lambda_n <= n, got lambda_{n} = {lam}"
            )
        return lam

    def _row(self, n: int) -> np.ndarray:
        lam = self._lambda(n)
        r = np.zeros(n + 1)
        r[n - lam:] = 1.0 / (lam + 1)
        return r

    def tilde_tail(self, m: int, n: int) -> float:
        if not 0 <= m <= n + 1:
            raise ValueError(f"tail length {m} out of range 0..{n + 1}")
        lam = self._lambda(n)
        return min(m, lam + 1) / (lam + 1)


class CesaroMatrix(SummabilityMatrix):
    """Cesàro means with varying parameter: t_{k,n} = A_{n-k}^{α_n-1}/A_n^{α_n}.

    Rows use the stable recurrence A_m^β = A_{m-1}^β (β+m)/m with the
    denominator accumulated hockey-stick style (Σ_l A_l^{α-1} = A_n^α), so
    row sums are exact to rounding.
    """

    def __init__(self, alpha: Callable[[int], float] | float, tag: str | None = None):
        if isinstance(alpha, (int, float)):
            value = float(alpha)
            self.alpha = lambda n: value
            tag = tag if tag is not None else f"{value:g}"
        else:
            self.alpha = alpha
            tag = tag if tag is not None else "alpha"
        self.id = f"cesaro({tag})"

    def _alpha(self, n: int) -> float:
        a = float(self.alpha(n))
        if not 0.0 < a <= 1.0:
            raise MatrixParameterError(
                f"{self.id}: need alpha_n in (0, 1], got alpha_{n} = {a}"
            )
        return a

    def _row(self, n: int) -> np.ndarray:
        a = self._alpha(n)
        m = np.arange(1, n + 1)
        lower = np.concatenate([[1.0], np.cumprod((a - 1.0 + m) / m)])  # A_m^{α-1}
        denom = lower.sum()  # = A_n^α
        return lower[::-1] / denom

    def tilde_tail(self, m: int, n: int) -> float:
        if not 0 <= m <= n + 1:
            raise ValueError(f"tail length {m} out of range 0..{n + 1}")
        if m == 0:
            return 0.0
        a = self._alpha(n)
        return a_number(m - 1, a) / a_number(n, a)


class NorlundLogMatrix(SummabilityMatrix):
    """Nörlund logarithmic means: t_{k,n} = 1/(H_n (n-k)) for k <= n-1.

    The final entry t_{n,n} is 0 (the family is defined only for k <= n-1),
    which breaks rowwise monotonicity at the last index; the validator
    accepts this under monotone_except_last.
    """

    id = "norlund_log"
    monotone_except_last = True

    def _row(self, n: int) -> np.ndarray:
        r = np.zeros(n + 1)
        gaps = np.arange(n, 0, -1, dtype=np.float64)
        r[:n] = 1.0 / (harmonic_number(n) * gaps)
        return r

    def tilde_tail(self, m: int, n: int) -> float:
        if not 0 <= m <= n + 1:
            raise ValueError(f"tail length {m} out of range 0..{n + 1}")
        if m == 0:
            return 0.0
        return harmonic_number(m - 1) / harmonic_number(n)


class NorlundMatrix(SummabilityMatrix):
    """General Nörlund means t_{k,n} = q_{n-k}/Q_n for nonincreasing q >= 0."""

    def __init__(self, q: Callable[[int], float], tag: str = "q"):
        self.q = q
        self.id = f"norlund({tag})"
        self._qs = np.zeros(0)
        self._cum = np.zeros(0)

    def _ensure(self, n: int) -> None:
        if self._qs.shape[0] > n:
            return
        size = max(16, 1 << (n + 1).bit_length())
        start = self._qs.shape[0]
        fresh = np.array([float(self.q(j)) for j in range(start, size)])
        if np.any(fresh < 0):
            raise MatrixParameterError(f"{self.id}: q must be nonnegative")
        qs = np.concatenate([self._qs, fresh])
        if np.any(np.diff(qs) > 0):
            raise MatrixParameterError(f"{self.id}: q must be nonincreasing")
        self._qs = qs
        self._cum = np.cumsum(qs)

    def q_partial(self, m: int) -> float:
        """Q_m = Σ_{j<=m} q_j."""
        self._ensure(m)
        return float(self._cum[m])

    def _row(self, n: int) -> np.ndarray:
        self._ensure(n)
        qn = self._cum[n]
        if qn <= 0:
            raise MatrixParameterError(f"{self.id}: Q_{n} must be positive")
        return self._qs[n::-1] / qn

    def tilde_tail(self, m: int, n: int) -> float:
        if not 0 <= m <= n + 1:
            raise ValueError(f"tail length {m} out of range 0..{n + 1}")
        if m == 0:
            return 0.0
        return self.q_partial(m - 1) / self.q_partial(n)


_NAMED_LAMBDAS: dict[str, Callable[[int], int]] = {
    "half": lambda n: (n + 1) // 2,
    "sqrt": lambda n: max(1, int(math.isqrt(n))),
}

_NAMED_ALPHAS: dict[str, Callable[[int], float]] = {
    "inv_log2": lambda n: 1.0 if n <= 2 else min(1.0, 1.0 / math.log2(n)),
}

_NAMED_QS: dict[str, Callable[[int], float]] = {
    "ones": lambda k: 1.0,
    "one_over_k1": lambda k: 1.0 / (k + 1),
    "pow2": lambda k: 2.0 ** (-k),
}


def make_matrix(family: str, **params) -> SummabilityMatrix:
    """Build a matrix from a family tag, with named parameter shortcuts.

    families: partial_sum | vallee_poussin(lam=) | cesaro(alpha=) |
    norlund_log | norlund(q=).  lam/alpha/q accept callables, numbers
    (alpha), or the named tags used by experiment descriptors
    (lam: half, sqrt; alpha: inv_log2; q: ones, one_over_k1, pow2).
    """
    if family == "partial_sum":
        _reject_extras(family, params)
        return PartialSumMatrix()
    if family == "vallee_poussin":
        lam = params.pop("lam")
        _reject_extras(family, params)
        if isinstance(lam, str):
            if lam not in _NAMED_LAMBDAS:
                raise MatrixParameterError(f"unknown lambda tag {lam!r}")
            return ValleePoussinMatrix(_NAMED_LAMBDAS[lam], tag=lam)
        return ValleePoussinMatrix(lam)
    if family == "cesaro":
        alpha = params.pop("alpha")
        _reject_extras(family, params)
        if isinstance(alpha, str):
            if alpha not in _NAMED_ALPHAS:
                raise MatrixParameterError(f"unknown alpha tag {alpha!r}")
            return CesaroMatrix(_NAMED_ALPHAS[alpha], tag=alpha)
        return CesaroMatrix(alpha)
    if family == "norlund_log":
        _reject_extras(family, params)
        return NorlundLogMatrix()
    if family == "norlund":
        q = params.pop("q")
        _reject_extras(family, params)
        if isinstance(q, str):
            if q not in _NAMED_QS:
                raise MatrixParameterError(f"unknown q tag {q!r}")
            return NorlundMatrix(_NAMED_QS[q], tag=q)
        return NorlundMatrix(q)
    raise MatrixParameterError(f"unknown matrix family {family!r}")


def _reject_extras(family: str, params: dict) -> None:
    if params:
        raise MatrixParameterError(f"{family}: unexpected parameters {sorted(params)}")


@dataclass(frozen=True)
class TailSums:
    """Suffix sums of one matrix row, accumulated from the top.

    suffix[m] = T_n^{(m)} for m = 0..n+1 (suffix[n+1] = 0), from which
    T̃_{m,n} = suffix[n-m+1] and Ω_s(n) = T̃_{2^s,n}.
    """

    n: int
    suffix: np.ndarray

    def T(self, m: int) -> float:
        if not 0 <= m <= self.n + 1:
            raise ValueError(f"suffix start {m} out of range 0..{self.n + 1}")
        return float(self.suffix[m])

    def tilde(self, m: int) -> float:
        if not 0 <= m <= self.n + 1:
            raise ValueError(f"tail length {m} out of range 0..{self.n + 1}")
        return float(self.suffix[self.n - m + 1])

    def omega(self, s: int) -> float:
        return self.tilde(min(1 << s, self.n + 1))


def tail_sums(matrix: SummabilityMatrix, n: int) -> TailSums:
    """Accumulate T_n^{(m)} top-down (no cancellation: entries are >= 0)."""
    row = matrix.row(n)
    suffix = np.zeros(n + 2)
    suffix[:n + 1] = row[::-1].cumsum()[::-1]
    return TailSums(n=n, suffix=suffix)


def kernel(matrix: SummabilityMatrix, n: int, resolution: int) -> DyadicGrid:
    """V_n = Σ_{k=1}^{n} t_{k,n} D_k by direct accumulation of Dirichlet kernels."""
    if n >= 1 << resolution:
        raise FrequencyRangeError(
            f"kernel order {n} out of range for resolution {resolution}"
        )
    row = matrix.row(n)
    size = 1 << resolution
    d = np.zeros(size)
    acc = np.zeros(size)
    for k in range(1, n + 1):
        d += _walsh_samples(k - 1, resolution)
        if row[k]:
            acc += row[k] * d
    return DyadicGrid(resolution, acc, label=f"kernel[{matrix.id}]({n})")


def mean(matrix: SummabilityMatrix, f: DyadicGrid, n: int) -> DyadicGrid:
    """𝒯_n(f), computed spectrally: multiplier T_n^{(l+1)} at frequency l < n."""
    if n >= f.size:
        raise FrequencyRangeError(
            f"mean order {n} out of range for resolution {f.resolution}"
        )
    tails = tail_sums(matrix, n)
    mult = np.zeros(f.size)
    mult[:n] = tails.suffix[1:n + 1]
    coeffs = fwht(f).coefficients * mult
    return inverse_fwht(SpectrumVector(f.resolution, coeffs))


def decompose(matrix: SummabilityMatrix, n: int, resolution: int
              ) -> tuple[DyadicGrid, DyadicGrid, DyadicGrid]:
    """Split w_n·V_n into (V1, V2, V3): the Abel-transform decomposition.

    For each set digit s of n (writing n^(s), n(s) for the upper/lower digit
    parts and K_k for the Fejér kernel):

      V1 = -Σ_s w_{n(s)} w_{2^s-1} Σ_{k=1}^{2^s-2} (t_{n^(s)-k,n} - t_{n^(s)-k-1,n}) k K_k
      V2 = -Σ_s w_{n(s)} w_{2^s-1} t_{n^(s+1)+1,n} (2^s-1) K_{2^s-1}
      V3 =  Σ_s T_n^{(n^(s+1)+1)} w_{2^s} D_{2^s}

    V2 is a single boundary term per scale (the Abel transform produces
    exactly one), and V3's weight T_n^{(n^(s+1)+1)} equals T̃_{n(s),n} —
    the within-factor-2 relative of the dyadic weight Ω_s(n) = T̃_{2^s,n}
    used by carleson_kernel.  V1 + V2 + V3 = w_n·V_n is an exact identity.
    """
    idx = WalshIndex(n)
    if n >= 1 << resolution:
        raise FrequencyRangeError(
            f"decompose order {n} out of range for resolution {resolution}"
        )
    size = 1 << resolution
    row = matrix.row(n)
    tails = tail_sums(matrix, n)
    top = idx.order
    fj = fejer_table(resolution, 1 << top) if top >= 1 else None
    v1 = np.zeros(size)
    v2 = np.zeros(size)
    v3 = np.zeros(size)
    for s in idx.digits():
        ns = idx.upper(s)
        ns1 = idx.upper(s + 1)
        nlow = idx.lower(s)
        prefix = _walsh_samples(nlow, resolution) * _walsh_samples((1 << s) - 1, resolution)
        if (1 << s) - 2 >= 1:
            ks = np.arange(1, (1 << s) - 1)
            coeffs = row[ns - ks] - row[ns - ks - 1]
            v1 -= prefix * (coeffs @ fj[ks])
        if (1 << s) - 1 >= 1:
            v2 -= prefix * (row[ns1 + 1] * fj[(1 << s) - 1])
        v3 += tails.T(ns1 + 1) * band_kernel_samples(s, resolution)
    return (
        DyadicGrid(resolution, v1, label=f"V1[{matrix.id}]({n})"),
        DyadicGrid(resolution, v2, label=f"V2[{matrix.id}]({n})"),
        DyadicGrid(resolution, v3, label=f"V3[{matrix.id}]({n})"),
    )


def lebesgue_constant(matrix: SummabilityMatrix, n: int, resolution: int) -> float:
    """ℒ_n = ||V_n||_1."""
    return norms(kernel(matrix, n, resolution)).l1


def boundedness_index(matrix: SummabilityMatrix, n: int) -> float:
    """Σ_{s=0}^{|n|} T̃_{2^s,n} — the proxy for H_1→L_1 uniform boundedness.

    Pure tail arithmetic; no grid is allocated, so n may be large.
    """
    top = WalshIndex(n).order
    return float(sum(matrix.tilde_tail(min(1 << s, n + 1), n) for s in range(top + 1)))
