"""Block-construction witnesses for the failure of weak (1,1) bounds.

For a scale a and divergence depth η = min(⌊a/8⌋, ⌊G_a/2⌋) (G_a the inf of
γ over 2^{a/2} <= n < 2^a), the witness polynomial couples two digit blocks,
lower positions a-2η..a-η-1 and upper positions a-η..a-1:

    W_a = (1/√η) · Π_j (1 + r_{a-2η+j} r_{a-η+j}) · Σ_l r_{a-2η+l}

Every object here depends only on those 2η bit positions, so all evaluation
runs on a (2η)-bit window grid with index translation; full-grid embedding
exists for cross-checks at small a.

The evaluation set and digit choice (bit conventions pinned by requiring
the closed-form identity below to hold exactly; see the API notes):

    E_a = {x : x_{a-η} ⊕ x_{a-2η} = 1}                        |E_a| = 1/2
    digit choice: if Σ_{j>=1} x_{a-2η+j} >= η/3 take ε_j = x_j on the block,
    else ε_j = 1 - x_j; always ε_0 = 0.
    n_a(x) = λ + 2^η λ,   λ = Σ_j ε_j 2^{a-2η+j}   (same block twice)

On E_a the martingale transform collapses to the lower-block terms:

    M_{n_a(x)}(Ω) W_a(x) = (1/√η) Σ_{j>=1} ε_j Ω_{a-2η+j}(n_a(x)) r_{a-2η+j}(x)

with every nonzero term of one sign and at least ⌈η/3⌉ of them, giving
|M| >= c·√η/3.  witness_eval computes M directly from martingale
differences of W_a and verifies this closed form on all of E_a.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import check_resolution, resolution_cap
from .grids import DyadicGrid, norms
from .indexing import WalshIndex
from .martingale import _cond_exp_samples, _mtransform_samples, _omega_fn, _weight_id
from .summability import SummabilityMatrix, tail_sums, mean
from .transform import fwht
from .kernels import _rademacher_samples


class ScaleTooSmallError(ValueError):
    """The requested scale cannot support the block construction."""


@dataclass(frozen=True)
class BlockParams:
    """Geometry of one block-construction stage."""

    a: int
    eta: int
    g_inf: int  # G_a: inf of gamma over 2^{a/2} <= n < 2^a

    def __post_init__(self) -> None:
        if self.eta < 1:
            raise ScaleTooSmallError(
                f"eta = {self.eta} at a = {self.a}: increase a (eta needs "
                f"a >= 8) or supply weights whose gamma grows faster"
            )
        check_resolution(self.window_bits)

    @property
    def window_lo(self) -> int:
        """Lowest bit position the construction touches."""
        return self.a - 2 * self.eta

    @property
    def window_bits(self) -> int:
        return 2 * self.eta

    @property
    def lower_positions(self) -> range:
        return range(self.a - 2 * self.eta, self.a - self.eta)

    @property
    def upper_positions(self) -> range:
        return range(self.a - self.eta, self.a)


def block_params(a: int, gamma_by_order: Callable[[int], int]) -> BlockParams:
    """Stage parameters from a scale and a per-order gamma infimum.

    gamma_by_order(m) must return inf{γ(n) : |n| = m}; G_a is then the min
    over the orders ⌊a/2⌋..a-1 meeting {2^{a/2} <= n < 2^a}.  (Exact for
    the formula gammas used in practice, and avoids enumerating 2^a ints.)
    """
    if a < 8:
        raise ScaleTooSmallError(f"need a >= 8, got {a}")
    orders = range(a // 2, a)
    g = min(int(gamma_by_order(m)) for m in orders)
    if g < 1:
        raise ScaleTooSmallError(f"gamma infimum {g} < 1 over orders {orders}")
    eta = min(a // 8, g // 2)
    return BlockParams(a=a, eta=eta, g_inf=g)


def _window_rademacher(p: BlockParams, j: int) -> np.ndarray:
    """r at real position window_lo + j, sampled on the window grid."""
    return _rademacher_samples(j, p.window_bits)


def witness_poly(p: BlockParams) -> DyadicGrid:
    """W_a on the window grid (resolution 2η); ||W_a||_1 <= 1."""
    eta = p.eta
    prod = np.ones(1 << p.window_bits)
    for j in range(eta):
        prod *= 1.0 + _window_rademacher(p, j) * _window_rademacher(p, eta + j)
    rsum = np.zeros_like(prod)
    for l in range(eta):
        rsum += _window_rademacher(p, l)
    prod *= rsum
    prod *= 1.0 / math.sqrt(eta)
    return DyadicGrid(p.window_bits, prod, label=f"witness({p.a},{p.eta})")


def embed(p: BlockParams, resolution: int,
          window_values: np.ndarray | None = None) -> DyadicGrid:
    """W_a on a full resolution-N grid, N >= a (for small-a cross-checks)."""
    if resolution < p.a:
        raise ValueError(f"embedding needs resolution >= a = {p.a}")
    check_resolution(resolution)
    w = witness_poly(p).samples if window_values is None else window_values
    idx = np.arange(1 << resolution, dtype=np.int64)
    win = (idx >> (resolution - p.a)) & ((1 << p.window_bits) - 1)
    return DyadicGrid(resolution, w[win], label=f"witness({p.a},{p.eta})@{resolution}")


def window_index(p: BlockParams, full_index: int, resolution: int) -> int:
    """Window sample index holding the same 2η construction bits."""
    return (full_index >> (resolution - p.a)) & ((1 << p.window_bits) - 1)


def _lower_block_bits(p: BlockParams, x: np.ndarray | int):
    """Digits x_{a-2η+j}, j = 0..η-1, from window sample indices."""
    nw = p.window_bits
    return [((x >> (nw - 1 - j)) & 1) for j in range(p.eta)]


def e_a_member(p: BlockParams, x: np.ndarray | int):
    """x_{a-η} ⊕ x_{a-2η} = 1, on window sample indices."""
    nw = p.window_bits
    upper_bit = (x >> (nw - 1 - p.eta)) & 1
    lower_bit = (x >> (nw - 1)) & 1
    return (upper_bit ^ lower_bit) == 1


def choose_n(p: BlockParams, x: int) -> int:
    """n_a(x) for a window sample index: the doubled chosen block.

    Needs η >= 2 (pair 0 is reserved for the E_a cancellation, so at least
    one further pair must exist to carry digits).
    """
    if p.eta < 2:
        raise ScaleTooSmallError(
            f"digit choice needs eta >= 2, got {p.eta}; increase a or gamma"
        )
    bits = _lower_block_bits(p, x)
    ones = sum(bits[1:])
    keep = ones >= p.eta / 3.0
    lam = 0
    for j in range(1, p.eta):
        eps = bits[j] if keep else 1 - bits[j]
        lam |= eps << (p.a - 2 * p.eta + j)
    if lam == 0:
        raise AssertionError("chosen block all zero; threshold rule violated")
    return lam + (lam << p.eta)


@dataclass(frozen=True)
class WitnessReport:
    """Quantitative outcome of one block-construction experiment."""

    a: int
    eta: int
    weight_id: str
    l1_norm: float
    e_a_measure: float
    min_on_ea: float
    median_on_ea: float
    weak_ratio: float
    lambda_threshold: float
    c_empirical: float
    closed_form_max_err: float

    def to_json(self) -> str:
        payload = {
            "a": self.a,
            "eta": self.eta,
            "weights": self.weight_id,
            "l1_norm": self.l1_norm,
            "e_a_measure": self.e_a_measure,
            "min_on_Ea": self.min_on_ea,
            "median_on_Ea": self.median_on_ea,
            "weak_ratio": self.weak_ratio,
            "lambda": self.lambda_threshold,
            "c_empirical": self.c_empirical,
            "closed_form_max_err": self.closed_form_max_err,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def witness_eval(p: BlockParams, weights, lambda_c0: float = 0.3) -> WitnessReport:
    """Evaluate M_{n_a(x)}(Ω)W_a on every x in E_a, directly and in closed form.

    The direct route assembles M from martingale differences of W_a (the
    product W_a·w_{n_a(x)} equals W_a identically because the doubled block
    is absorbed by the pair factors; asserted numerically below), stratified
    over the 2^{η-1} distinct digit choices.  The closed form must match to
    1e-9 on all of E_a.  The weak ratio uses λ = c0·√η·c with the empirical
    c = min over strata of the smallest weight the transform can select.
    """
    if p.eta < 2:
        raise ScaleTooSmallError(
            f"witness evaluation needs eta >= 2, got {p.eta}"
        )
    eta, nw = p.eta, p.window_bits
    size = 1 << nw
    omega = _omega_fn(weights)
    w = witness_poly(p).samples
    # spot-check the absorption identity W_a·w_n = W_a on one stratum
    probe = w * _window_walsh(p, choose_n(p, 0))
    if not np.allclose(probe, w, rtol=0.0, atol=1e-12):
        raise AssertionError("block absorption identity failed")

    # digit choice and weights per stratum; n may exceed int64, keep ints
    strata = 1 << (eta - 1)
    omega_lo = np.zeros((strata, eta))
    omega_hi = np.zeros((strata, eta))
    eps_of_key = np.zeros((strata, eta))
    c_emp = math.inf
    for b in range(strata):
        bits = [0] + [(b >> (j - 1)) & 1 for j in range(1, eta)]
        keep_b = sum(bits[1:]) >= eta / 3.0
        lam = 0
        for j in range(1, eta):
            eps = bits[j] if keep_b else 1 - bits[j]
            eps_of_key[b, j] = eps
            lam |= eps << (p.a - 2 * eta + j)
        n = lam + (lam << eta)
        used = [j for j in range(1, eta) if eps_of_key[b, j]]
        for j in used:
            omega_lo[b, j] = omega(p.a - 2 * eta + j, n)
            omega_hi[b, j] = omega(p.a - eta + j, n)
        c_emp = min(c_emp, min(omega_lo[b, j] for j in used))

    # ladder of block means of W_a: means[r] has 2^r entries
    means: list[np.ndarray] = [None] * (nw + 1)  # type: ignore[list-item]
    means[nw] = w
    for r in range(nw - 1, 0, -1):
        means[r] = means[r + 1].reshape(-1, 2).mean(axis=1)

    # every x in one rank-η block shares its first η digits, hence its
    # stratum, its digit choice, and all lower-block martingale differences
    blk = np.arange(1 << eta, dtype=np.int64)
    key_red = np.zeros(1 << eta, dtype=np.int64)
    for j in range(1, eta):
        key_red |= ((blk >> (eta - 1 - j)) & 1) << (j - 1)

    inv_sqrt = 1.0 / math.sqrt(eta)
    lo_total = np.zeros(1 << eta)
    closed_red = np.zeros(1 << eta)
    for j in range(1, eta):
        wj = omega_lo[key_red, j] * eps_of_key[key_red, j]
        diff = means[j + 1] - np.repeat(means[j], 2)
        lo_total += wj * np.repeat(diff, 1 << (eta - j - 1))
        sign = 1.0 - 2.0 * ((blk >> (eta - 1 - j)) & 1)
        closed_red += wj * (inv_sqrt * sign)

    direct = np.zeros(size)
    direct.reshape(1 << eta, -1)[...] = lo_total[:, None]
    for j in range(1, eta):
        rank = eta + j
        diff = means[rank + 1] - np.repeat(means[rank], 2)
        mult = np.repeat(omega_hi[key_red, j] * eps_of_key[key_red, j],
                         1 << (rank + 1 - eta))
        direct.reshape(1 << (rank + 1), -1)[...] += (mult * diff)[:, None]

    # E_a membership depends on digits 0 and η only: rank-(η+1) blocks
    blk2 = np.arange(1 << (eta + 1), dtype=np.int64)
    ea_red = (((blk2 >> eta) ^ blk2) & 1) == 1
    rows = direct.reshape(1 << (eta + 1), -1)
    on_ea = rows[ea_red]
    closed_rows = np.repeat(closed_red, 2)[ea_red]
    err = float(np.max(np.abs(on_ea - closed_rows[:, None])))
    abs_on_ea = np.abs(on_ea)
    lam_thr = lambda_c0 * math.sqrt(eta) * c_emp
    exceed = float(np.count_nonzero(abs_on_ea > lam_thr)) / size
    l1 = float(np.abs(w).sum()) / size
    return WitnessReport(
        a=p.a,
        eta=eta,
        weight_id=_weight_id(weights),
        l1_norm=l1,
        e_a_measure=on_ea.size / size,
        min_on_ea=float(abs_on_ea.min()),
        median_on_ea=float(np.median(abs_on_ea)),
        weak_ratio=lam_thr * exceed / l1,
        lambda_threshold=lam_thr,
        c_empirical=float(c_emp),
        closed_form_max_err=err,
    )


def _window_walsh(p: BlockParams, n: int) -> np.ndarray:
    """w_n on the window grid, for n supported on the window bit positions."""
    shifted = n >> p.window_lo
    if shifted << p.window_lo != n:
        raise ValueError(f"index {n} has digits below the window at a={p.a}")
    if shifted >= 1 << p.window_bits:
        raise ValueError(f"index {n} has digits above the window at a={p.a}")
    out = np.ones(1 << p.window_bits)
    j = 0
    while (1 << j) <= shifted:
        if (shifted >> j) & 1:
            out *= _window_rademacher(p, j)
        j += 1
    return out


def witness_direct_oracle(p: BlockParams, weights, x: int) -> float:
    """M_{n_a(x)}(Ω)W_a(x) through the generic martingale transform on the
    window, with weights translated to real bit positions.  Slow; used to
    cross-check the stratified evaluation."""
    omega = _omega_fn(weights)
    n_real = choose_n(p, x)

    def window_omega(k, n):
        return omega(k + p.window_lo, n << p.window_lo)

    w = witness_poly(p)
    vals = _mtransform_samples(w.samples, n_real >> p.window_lo,
                               p.window_bits, window_omega)
    return float(vals[x])


def lemma1_scale(w: DyadicGrid, gamma_value: float) -> DyadicGrid:
    """W¹ = W_a / γ^{1/4}: the summability rescaling of a witness block."""
    if gamma_value < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma_value}")
    return (gamma_value ** -0.25) * w


@dataclass(frozen=True)
class Lemma2Result:
    """A polynomial W⁰ whose matrix mean at scale 2^{b+2} reproduces a
    prescribed multiple of r_b on a dyadic set."""

    poly: DyadicGrid
    b: int
    alpha: float
    set_measure: float
    min_tail: float
    tail_lower_bound: float
    l2_norm: float
    l2_bound: float


def lemma2_poly(matrix: SummabilityMatrix, b: int, indicator: DyadicGrid,
                alpha: float, resolution: int | None = None) -> Lemma2Result:
    """Build W⁰ = Σ_k (C_k / T_{2^{b+2}}^{(k+1)}) w_k from α·r_b·1_A.

    The indicator must be rank-b measurable (so the spectrum of α·r_b·1_A
    sits in [2^b, 2^{b+1})) and nonempty; b+2 must fit the resolution.
    The divisor floor (2^{b+2}-k)/(2^{b+2}+1), valid for monotone rows, is
    reported alongside the actual minimum used.
    """
    a_grid = indicator
    n_res = a_grid.resolution if resolution is None else resolution
    if a_grid.resolution != n_res:
        raise ValueError("indicator resolution disagrees with requested resolution")
    if b + 2 > n_res:
        raise ValueError(f"need b+2 <= resolution, got b={b}, N={n_res}")
    vals = a_grid.samples
    if not np.all((vals == 0.0) | (vals == 1.0)):
        raise ValueError("indicator must be 0/1 valued")
    measure = float(vals.sum()) / a_grid.size
    if measure == 0.0:
        raise ValueError("indicator set is empty")
    coarse = _cond_exp_samples(vals, b)
    if not np.array_equal(coarse, vals):
        raise ValueError(f"indicator must be a union of rank-{b} dyadic intervals")

    target = alpha * _rademacher_samples(b, n_res) * vals
    coeffs = fwht(DyadicGrid(n_res, target)).coefficients.copy()
    band = slice(1 << b, 1 << (b + 1))
    outside = np.abs(coeffs).sum() - np.abs(coeffs[band]).sum()
    if outside > 1e-9 * max(1.0, np.abs(coeffs).max()):
        raise AssertionError("target spectrum leaked outside the band")

    scale_n = 1 << (b + 2)
    tails = tail_sums(matrix, scale_n)
    ks = np.arange(1 << b, 1 << (b + 1))
    divisors = tails.suffix[ks + 1]
    min_tail = float(divisors.min())
    if min_tail <= 0:
        raise ValueError(f"{matrix.id}: vanishing tail sums over the band")
    coeffs[band] = coeffs[band] / divisors
    from .transform import SpectrumVector, inverse_fwht

    poly = inverse_fwht(SpectrumVector(n_res, coeffs))
    l2 = norms(poly).l2
    return Lemma2Result(
        poly=DyadicGrid(n_res, poly.samples, label=f"lemma2[{matrix.id}](b={b})"),
        b=b,
        alpha=float(alpha),
        set_measure=measure,
        min_tail=min_tail,
        tail_lower_bound=(scale_n - float(ks.max())) / (scale_n + 1),
        l2_norm=l2,
        l2_bound=float(alpha) * math.sqrt(measure) / min_tail,
    )


@dataclass(frozen=True)
class ScheduleTerm:
    """One stage of the truncated divergence function: witness scale a,
    low scale b, and the gamma value used for the 1/γ^{1/4} rescaling."""

    a: int
    b: int
    gamma_value: int


@dataclass(frozen=True)
class F0Report:
    resolution: int
    matrix_id: str
    terms: tuple[dict, ...]
    f0_l1: float
    l1_triangle_bound: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "resolution": self.resolution,
                "matrix": self.matrix_id,
                "f0_l1": self.f0_l1,
                "l1_triangle_bound": self.l1_triangle_bound,
                "terms": list(self.terms),
            },
            indent=2,
            sort_keys=True,
        )


def f0_demo(matrix: SummabilityMatrix, schedule: Sequence[ScheduleTerm],
            gamma_by_order: Callable[[int], int], resolution: int,
            sample_strata: int = 32, seed: int = 0) -> F0Report:
    """Assemble the truncated f₀ = Σ_k (W⁰_{b_k} + W¹_{a_k}) and evaluate the
    matrix means at both of each stage's critical scales.

    A demo schedule must interleave spectrally: b_k + 2 <= a_k - 2η_k and
    a_k <= b_{k+1} (at most 4 terms, everything within the resolution).
    The full-scale smallness |A_k| <= 2^{-2a_k} is unattainable on any
    desk-size grid, so A_k defaults to a single rank-b_k interval; observed
    lower bounds are reported against the γ^{1/4} and 2^{b_k/2} predictions
    together with the realized cross-term sizes, with no inequality asserted.
    """
    if not 1 <= len(schedule) <= 4:
        raise ValueError("demo schedule must have 1 to 4 terms")
    check_resolution(resolution)
    rng = np.random.default_rng(seed)
    stages = []
    for i, term in enumerate(schedule):
        params = block_params(term.a, gamma_by_order)
        if term.b + 2 > term.a - 2 * params.eta:
            raise ValueError(
                f"term {i}: need b+2 <= a-2η, got b={term.b}, a={term.a}, "
                f"η={params.eta}"
            )
        if i + 1 < len(schedule) and term.a > schedule[i + 1].b:
            raise ValueError(
                f"term {i}: need a_k <= b_(k+1), got {term.a} > {schedule[i + 1].b}"
            )
        if term.a > resolution:
            raise ValueError(f"term {i}: a={term.a} exceeds resolution {resolution}")
        stages.append(params)

    size = 1 << resolution
    f0 = np.zeros(size)
    term_reports = []
    pieces = []
    for term, params in zip(schedule, stages):
        w_window = witness_poly(params)
        w1 = lemma1_scale(embed(params, resolution, w_window.samples),
                          term.gamma_value)
        alpha = 2.0 ** (term.a / 2.0)
        block = size >> term.b
        start = int(rng.integers(0, 1 << term.b)) * block
        ind = np.zeros(size)
        ind[start:start + block] = 1.0
        l2r = lemma2_poly(matrix, term.b, DyadicGrid(resolution, ind), alpha)
        f0 += w1.samples + l2r.poly.samples
        pieces.append((term, params, w_window, w1, l2r, ind))

    f0_grid = DyadicGrid(resolution, f0, label="f0_demo")
    triangle = 0.0
    for term, params, w_window, w1, l2r, ind in pieces:
        triangle += norms(w1).l1 + norms(l2r.poly).l1

    for term, params, w_window, w1, l2r, ind in pieces:
        # low scale: 𝒯 at 2^{b+2} on the set A
        low = mean(matrix, f0_grid, 1 << (term.b + 2))
        on_a = np.abs(low.samples[ind == 1.0])
        # witness scale: 𝒯 at n_a(x) for sampled strata of E_a
        nw = params.window_bits
        ea_idx = [x for x in range(1 << nw) if e_a_member(params, x)]
        chosen = rng.choice(len(ea_idx), size=min(sample_strata, len(ea_idx)),
                            replace=False)
        observed = []
        shift = resolution - params.a
        for pick in chosen:
            x_win = ea_idx[int(pick)]
            n_real = choose_n(params, x_win)
            full = (int(rng.integers(0, size)) & ~(((1 << nw) - 1) << shift)) \
                | (x_win << shift)
            tr = mean(matrix, f0_grid, n_real)
            observed.append(abs(float(tr.samples[full])))
        term_reports.append({
            "a": term.a,
            "b": term.b,
            "eta": params.eta,
            "gamma_value": term.gamma_value,
            "w1_l1": norms(w1).l1,
            "w0_l1": norms(l2r.poly).l1,
            "set_measure": l2r.set_measure,
            "low_scale_min_on_A": float(on_a.min()),
            "low_scale_predicted": l2r.alpha,
            "low_scale_floor_2^(b/2)": 2.0 ** (term.b / 2.0),
            "witness_min_observed": float(min(observed)),
            "witness_median_observed": float(np.median(observed)),
            "witness_predicted_gamma_quarter": term.gamma_value ** 0.25,
            "cross_term_bound": 2.0 ** term.b,
        })

    return F0Report(
        resolution=resolution,
        matrix_id=matrix.id,
        terms=tuple(term_reports),
        f0_l1=norms(f0_grid).l1,
        l1_triangle_bound=triangle,
    )
