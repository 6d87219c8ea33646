"""Weight families Ω_k(n), cone ratio analysis, and the divergence machinery.

A weight family assigns Ω_k(n) > 0 for 0 <= k <= |n|, nondecreasing in k.
The built-ins:

    ones          Ω ≡ 1 (classical Walsh-Carleson)
    harmonic      Ω_k(n) = 1/(|n|-k+1)   (summable rows yet no divergence seq)
    from_matrix   Ω_s(n) = T̃_{2^s,n} induced by a summability matrix
    t3_family(L)  constant L^{-ω_n} early part, geometric L^{k-|n|} tail,
                  ω_n = ⌊½ log_L(|n|+1)⌋ — tail ratio exactly L yet
                  Σ_k Ω_k(n) ≳ √(|n|+1)

Cones near the top dyadic scale:

    Δ_κ = {(k,n): κ|n| < k <= |n|}          width h(n) = ⌊(1-κ)|n|/2⌋
    Δ_ω = {(k,n): |n|-ω_n < k <= |n|}       width h(n) = ω_n

The divergence search realizes the constructive proof: θ_k(n) =
Ω_k(n)/Ω_{k-1}(n) - 1, and γ(n) is the largest 1 <= j <= h(n) with
max_{|n|-j+1 <= k <= |n|} θ_k(n) <= 1/j (fallback 1).  All "limits" are
reported as finite-range statistics over explicit order windows; nothing
asserts an actual limit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .indexing import WalshIndex
from .summability import SummabilityMatrix


class WeightFamily:
    """Base: positive, k-nondecreasing weights Ω_k(n) for 0 <= k <= |n|."""

    id: str = "abstract"
    zero_ok_at_bottom: bool = False  # matrix families may have Ω_0(n) = 0

    def omega(self, k: int, n: int) -> float:
        raise NotImplementedError

    def profile(self, n: int) -> np.ndarray:
        """[Ω_0(n), ..., Ω_{|n|}(n)]."""
        top = WalshIndex(n).order
        return np.array([self.omega(k, n) for k in range(top + 1)])

    def validate(self, ns: Iterable[int], tol: float = 0.0) -> None:
        for n in ns:
            prof = self.profile(n)
            if np.any(np.diff(prof) < -tol):
                raise ValueError(f"{self.id}: weights not nondecreasing at n={n}")
            low = prof[1:] if self.zero_ok_at_bottom else prof
            if np.any(low <= 0.0):
                raise ValueError(f"{self.id}: nonpositive weight at n={n}")


class OnesWeights(WeightFamily):
    id = "ones"

    def omega(self, k: int, n: int) -> float:
        return 1.0


class HarmonicWeights(WeightFamily):
    """Ω_k(n) = 1/(|n|-k+1): row sums are harmonic numbers, so the Ω-sum
    blows up, yet Ω_{|n|-γ}(n) = 1/(γ+1) kills every candidate divergence
    sequence."""

    id = "harmonic"

    def omega(self, k: int, n: int) -> float:
        top = WalshIndex(n).order
        if not 0 <= k <= top:
            raise ValueError(f"k={k} out of range 0..{top}")
        return 1.0 / (top - k + 1)


class MatrixWeights(WeightFamily):
    """Ω_s(n) = T̃_{2^s,n} induced by a summability matrix."""

    def __init__(self, matrix: SummabilityMatrix):
        self.matrix = matrix
        self.id = f"tilde[{matrix.id}]"
        # t_{n,n} = 0 families (Nörlund-log) give Ω_0(n) = 0
        self.zero_ok_at_bottom = matrix.monotone_except_last

    def omega(self, k: int, n: int) -> float:
        top = WalshIndex(n).order
        if not 0 <= k <= top:
            raise ValueError(f"k={k} out of range 0..{top}")
        return self.matrix.tilde_tail(min(1 << k, n + 1), n)


class T3Weights(WeightFamily):
    """The explicit family from the ratio-vs-sum counterexample:
    Ω_k(n) = L^{-ω_n} for k <= |n|-ω_n, else L^{k-|n|}."""

    def __init__(self, L: float):
        if L <= 1.0:
            raise ValueError(f"t3 family needs L > 1, got {L}")
        self.L = float(L)
        self.id = f"t3(L={L:g})"

    def cone_width(self, n: int) -> int:
        """ω_n = ⌊½ log_L(|n|+1)⌋."""
        m = WalshIndex(n).order
        if self.L == 2.0:
            return int(math.floor(0.5 * math.log2(m + 1)))
        return int(math.floor(0.5 * math.log(m + 1) / math.log(self.L)))

    def omega(self, k: int, n: int) -> float:
        m = WalshIndex(n).order
        if not 0 <= k <= m:
            raise ValueError(f"k={k} out of range 0..{m}")
        w = self.cone_width(n)
        if k <= m - w:
            return self.L ** (-w)
        return self.L ** (k - m)


def ones() -> OnesWeights:
    return OnesWeights()


def harmonic() -> HarmonicWeights:
    return HarmonicWeights()


def from_matrix(matrix: SummabilityMatrix) -> MatrixWeights:
    return MatrixWeights(matrix)


def t3_family(L: float) -> T3Weights:
    return T3Weights(L)


@dataclass(frozen=True)
class ConeSpec:
    """Top-scale index region: Δ_κ (fixed fraction) or Δ_ω (explicit widths)."""

    kind: str
    kappa: float = 0.0
    omega: Callable[[int], int] | None = None

    @classmethod
    def kappa_cone(cls, kappa: float) -> "ConeSpec":
        if not 0.0 < kappa < 1.0:
            raise ValueError(f"kappa must be in (0,1), got {kappa}")
        return cls(kind="kappa", kappa=kappa)

    @classmethod
    def omega_cone(cls, omega: Callable[[int], int]) -> "ConeSpec":
        return cls(kind="omega", omega=omega)

    def width(self, n: int) -> int:
        """h_Δ(n): the usable depth below |n| for the divergence construction."""
        m = WalshIndex(n).order
        if self.kind == "kappa":
            return int(math.floor((1.0 - self.kappa) * m / 2.0))
        return int(self.omega(n))

    def members(self, n: int) -> range:
        """Cone row at n: the k with (k, n) in the cone."""
        m = WalshIndex(n).order
        if self.kind == "kappa":
            lo = int(math.floor(self.kappa * m))
            if self.kappa * m == lo:
                lo -= 1  # strict inequality κ|n| < k
            return range(lo + 1, m + 1)
        w = int(self.omega(n))
        return range(max(0, m - w) + 1, m + 1)

    def contains(self, k: int, n: int) -> bool:
        return k in self.members(n)

    def validate_omega_condition(self, ns: Sequence[int]) -> None:
        """Finite shadow of (M): ω_n and |n|/ω_n nondecreasing over the range."""
        if self.kind != "omega":
            return
        ws = [int(self.omega(n)) for n in ns]
        orders = [WalshIndex(n).order for n in ns]
        if any(w < 1 for w in ws):
            raise ValueError("omega cone must have positive widths")
        if any(b < a for a, b in zip(ws, ws[1:])):
            raise ValueError("omega widths must be nondecreasing over the range")
        ratios = [m / w for m, w in zip(orders, ws)]
        if any(b < a - 1e-12 for a, b in zip(ratios, ratios[1:])):
            raise ValueError("|n|/omega_n must be nondecreasing over the range")

    def is_subcone_of(self, other: "ConeSpec", ns: Sequence[int]) -> bool:
        """Pairwise membership check Δ_self ⊆ Δ_other over the given n values."""
        for n in ns:
            mine = set(self.members(n))
            if not mine <= set(other.members(n)):
                return False
        return True


def variation_sum(weights: WeightFamily, n: int) -> float:
    """Σ_{k=0}^{|n|} |ε_{k-1}(n) - ε_k(n)| Ω_k(n), with ε_{-1} = 0."""
    idx = WalshIndex(n)
    total = 0.0
    prev = 0
    for k in range(idx.order + 1):
        cur = idx.digit(k)
        if cur != prev:
            total += weights.omega(k, n)
        prev = cur
    return total


def domination_bound(weights: WeightFamily, n: int) -> float:
    """Pointwise constant from the summation-by-parts estimate:
    Σ_{k=1}^{|n|} |ε_{k-1} - ε_k| Ω_{k-1}(n) + Ω_{|n|}(n)."""
    idx = WalshIndex(n)
    total = weights.omega(idx.order, n)
    for k in range(1, idx.order + 1):
        if idx.digit(k - 1) != idx.digit(k):
            total += weights.omega(k - 1, n)
    return total


def top_scale_stats(weights: WeightFamily, ns: Iterable[int]) -> tuple[float, float]:
    """(min, max) of Ω_{|n|}(n) over the given indices."""
    vals = [weights.omega(WalshIndex(n).order, n) for n in ns]
    if not vals:
        raise ValueError("empty index range")
    return (min(vals), max(vals))


def omega_sum(weights: WeightFamily, n: int) -> float:
    """Σ_{k=0}^{|n|} Ω_k(n)."""
    return float(weights.profile(n).sum())


def sample_orders(orders: Sequence[int], reps: int = 0, seed: int = 0
                  ) -> dict[int, list[int]]:
    """Deterministic representatives per dyadic order: 2^m, 2^{m+1}-1, and
    optionally `reps` seeded uniform draws from [2^m, 2^{m+1})."""
    rng = np.random.default_rng(seed)
    out: dict[int, list[int]] = {}
    for m in orders:
        ns = {1 << m, (1 << (m + 1)) - 1}
        if reps:
            ns.update(int(v) for v in rng.integers(1 << m, 1 << (m + 1), size=reps))
        out[m] = sorted(ns)
    return out


@dataclass(frozen=True)
class OrderRatioStats:
    order: int
    n_count: int
    ratio_min: float
    ratio_max: float
    ratio_mean: float
    max_deviation: float  # max over cone rows of |ratio - candidate_L|


@dataclass(frozen=True)
class RatioScan:
    candidate_L: float
    rows: tuple[OrderRatioStats, ...]

    @property
    def deviation_trend_decreasing(self) -> bool:
        devs = [r.max_deviation for r in self.rows]
        return all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))

    def final_deviation(self) -> float:
        return self.rows[-1].max_deviation


def cone_ratio_scan(weights: WeightFamily, cone: ConeSpec, orders: Sequence[int],
                    candidate_L: float = 1.0, reps: int = 0, seed: int = 0
                    ) -> RatioScan:
    """Aggregate Ω_k(n)/Ω_{k-1}(n) over cone rows, per dyadic order.

    Reports per-order min/max/mean and the max deviation from candidate_L;
    whether that deviation shrinks with the order is exposed as a trend
    flag.  No limit is asserted.
    """
    rows = []
    for m, ns in sample_orders(orders, reps, seed).items():
        ratios: list[float] = []
        for n in ns:
            for k in cone.members(n):
                if k < 1:
                    continue
                prev = weights.omega(k - 1, n)
                if prev <= 0.0:
                    continue
                ratios.append(weights.omega(k, n) / prev)
        if not ratios:
            raise ValueError(f"cone empty at order {m}")
        arr = np.array(ratios)
        rows.append(OrderRatioStats(
            order=m,
            n_count=len(ns),
            ratio_min=float(arr.min()),
            ratio_max=float(arr.max()),
            ratio_mean=float(arr.mean()),
            max_deviation=float(np.max(np.abs(arr - candidate_L))),
        ))
    return RatioScan(candidate_L=candidate_L, rows=tuple(rows))


def gamma_of(weights: WeightFamily, cone: ConeSpec, n: int) -> tuple[int, int, float]:
    """The constructive γ(n): largest 1 <= j <= h(n) with
    max_{|n|-j+1 <= k <= |n|} θ_k(n) <= 1/j, θ_k = Ω_k/Ω_{k-1} - 1.

    Returns (gamma, blocked_j, blocking_theta); blocked_j is the smallest
    inadmissible j (0 when none blocked), with the θ value that blocked it.
    Fallback γ = 1 when even j = 1 is inadmissible.
    """
    m = WalshIndex(n).order
    h = max(1, min(cone.width(n), m))
    theta_max = 0.0
    gamma = 0
    blocked_j = 0
    blocking_theta = 0.0
    for j in range(1, h + 1):
        k = m - j + 1
        prev = weights.omega(k - 1, n)
        if prev <= 0.0:
            blocked_j, blocking_theta = j, math.inf
            break
        theta = weights.omega(k, n) / prev - 1.0
        theta_max = max(theta_max, theta)
        if theta_max <= 1.0 / j + 1e-15:
            gamma = j
        elif not blocked_j:
            blocked_j, blocking_theta = j, theta_max
    if gamma == 0:
        gamma = 1  # the proof's fallback for the finitely many remaining n
    return gamma, blocked_j, blocking_theta


@dataclass(frozen=True)
class DivergenceSearchResult:
    """Outcome of the constructive search over a finite order range.

    found=True: `gamma` behaves like a divergence sequence on the range
    (per-order inf grows, sup γ/|n| < 1, empirical c > 0).  found=False: a
    refusal certificate with the blocking ratios, the cone ratio floor, the
    top-scale extrema, the resulting bound on γ, and the LME profile
    j ↦ min_n Ω_{|n|-j}(n).
    """

    weight_id: str
    cone_kind: str
    found: bool
    gamma: dict[int, int]
    per_order_inf: tuple[tuple[int, int], ...]
    gamma_over_order_sup: float
    c_empirical: float
    ebound_failures: int
    ratio_floor: float | None = None
    top_scale: tuple[float, float] = (0.0, 0.0)
    gamma_bound: float | None = None
    lme_profile: tuple[tuple[int, float], ...] = ()
    blocking: tuple[tuple[int, int, float], ...] = ()

    def to_json(self) -> str:
        payload = {
            "weights": self.weight_id,
            "cone": self.cone_kind,
            "found": self.found,
            "gamma": {str(k): v for k, v in sorted(self.gamma.items())},
            "per_order_inf": [list(t) for t in self.per_order_inf],
            "gamma_over_order_sup": self.gamma_over_order_sup,
            "c_empirical": self.c_empirical,
            "ebound_failures": self.ebound_failures,
            "ratio_floor": self.ratio_floor,
            "top_scale": list(self.top_scale),
            "gamma_bound": self.gamma_bound,
            "lme_profile": [list(t) for t in self.lme_profile],
            "blocking": [list(t) for t in self.blocking],
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def divergence_search(weights: WeightFamily, cone: ConeSpec, orders: Sequence[int],
                      reps: int = 0, seed: int = 0) -> DivergenceSearchResult:
    """Run the constructive γ search and classify the finite-range outcome.

    Accepted as a divergence sequence iff inf γ at the top probed order
    exceeds inf γ at the bottom order and reaches at least 2; otherwise a
    refusal certificate is emitted (γ pinned at a bounded value while the
    cone keeps widening).
    """
    samples = sample_orders(orders, reps, seed)
    gamma: dict[int, int] = {}
    blocking: list[tuple[int, int, float]] = []
    per_order_inf: list[tuple[int, int]] = []
    sup_ratio = 0.0
    c_emp = math.inf
    ebound_failures = 0
    for m, ns in samples.items():
        infs = []
        for n in ns:
            g, bj, btheta = gamma_of(weights, cone, n)
            gamma[n] = g
            infs.append(g)
            sup_ratio = max(sup_ratio, g / m)
            lme = weights.omega(m - g, n)
            c_emp = min(c_emp, lme)
            if bj:
                blocking.append((n, bj, btheta))
            if lme < math.exp(-1.0) * weights.omega(m, n) - 1e-12:
                ebound_failures += 1
        per_order_inf.append((m, min(infs)))
    bottom, top = per_order_inf[0][1], per_order_inf[-1][1]
    found = top > bottom and top >= 2
    all_ns = [n for ns in samples.values() for n in ns]
    tops = top_scale_stats(weights, all_ns)
    max_depth = min(
        max(1, min(cone.width(n), WalshIndex(n).order)) for n in all_ns
    )
    lme_profile = tuple(
        (j, min(weights.omega(WalshIndex(n).order - j, n) for n in all_ns))
        for j in range(1, max_depth + 1)
    )
    ratio_floor = None
    gamma_bound = None
    if not found:
        top_m, top_ns = max(samples.items())
        floors: list[float] = []
        for n in top_ns:
            for k in cone.members(n):
                if k < 1:
                    continue
                prev = weights.omega(k - 1, n)
                if prev > 0.0:
                    floors.append(weights.omega(k, n) / prev)
        ratio_floor = min(floors) if floors else None
        if ratio_floor is not None and ratio_floor > 1.0 and c_emp > 0:
            gamma_bound = math.log(tops[1] / c_emp) / math.log(ratio_floor)
    return DivergenceSearchResult(
        weight_id=weights.id,
        cone_kind=cone.kind,
        found=found,
        gamma=gamma,
        per_order_inf=tuple(per_order_inf),
        gamma_over_order_sup=sup_ratio,
        c_empirical=float(c_emp),
        ebound_failures=ebound_failures,
        ratio_floor=ratio_floor,
        top_scale=tops,
        gamma_bound=gamma_bound,
        lme_profile=lme_profile,
        blocking=tuple(blocking),
    )


@dataclass(frozen=True)
class Prop2Result:
    """Nörlund-sequence search: pairs (n_j, γ_j = j) with a_{n_j - j} >= c·a_{n_j},
    or a range-limited boundedness certificate sup A_n/a_n."""

    c: float
    pairs: tuple[tuple[int, int], ...]
    exhausted_at: int | None
    bound_certificate: float | None
    range_len: int

    @property
    def found_all(self) -> bool:
        return self.exhausted_at is None


def prop2_search(a: Sequence[float], c: float = 0.5,
                 max_m: int | None = None) -> Prop2Result:
    """Scan m = 1, 2, ... for the next n (strictly increasing) with
    a_{n-m} >= c·a_n; on the first m with no such n in range, report
    sup A_n/a_n over the range as the boundedness certificate."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a 1-d sequence with at least two entries")
    if np.any(arr <= 0) or np.any(np.diff(arr) < 0):
        raise ValueError("sequence must be positive and nondecreasing")
    top = arr.size - 1
    if max_m is None:
        max_m = top
    pairs: list[tuple[int, int]] = []
    prev_n = 0
    exhausted = None
    for m in range(1, max_m + 1):
        found_n = None
        for n in range(max(prev_n + 1, m), top + 1):
            if arr[n - m] >= c * arr[n]:
                found_n = n
                break
        if found_n is None:
            exhausted = m
            break
        pairs.append((found_n, m))
        prev_n = found_n
    bound = None
    if exhausted is not None:
        partial = np.cumsum(arr)
        bound = float(np.max(partial / arr))
    return Prop2Result(
        c=c,
        pairs=tuple(pairs),
        exhausted_at=exhausted,
        bound_certificate=bound,
        range_len=arr.size,
    )
