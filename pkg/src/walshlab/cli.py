"""Batch experiment runner.

Every analysis in the package is reachable through a subcommand or through
a JSON experiment descriptor (`walshlab run exp.json`).  All artifacts are
CSV/JSON, written deterministically (seeded generators, fixed row order,
repr-formatted floats) so reruns are byte-identical.  Exit codes: 0 success,
1 descriptor/parameter validation error, 2 a declared tolerance check failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import CAP_ENV_VAR, set_resolution_cap
from .grids import DyadicGrid, norms, weak_l1, write_grid_csv
from .indexing import WalshIndex
from .kernels import dirichlet, fejer_sum, partial_sum, rademacher, walsh
from .martingale import doob_max
from .summability import (
    MatrixParameterError,
    SummabilityMatrix,
    boundedness_index,
    decompose,
    kernel,
    lebesgue_constant,
    make_matrix,
    mean,
    tail_sums,
)
from .weights import (
    ConeSpec,
    WeightFamily,
    cone_ratio_scan,
    divergence_search,
    from_matrix,
    harmonic,
    omega_sum,
    ones,
    prop2_search,
    t3_family,
    variation_sum,
)
from .witness import block_params, witness_eval

PRNG_NAME = "numpy.random.default_rng (PCG64)"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_TOLERANCE = 2


class DescriptorError(ValueError):
    """Experiment descriptor failed validation."""


_FAMILY_PARAM_KEYS = ("alpha", "lam", "q")

_KIND_FIELDS: dict[str, tuple[set[str], set[str]]] = {
    # kind -> (required fields, optional fields)
    "kernel_dump": ({"kernel", "n"}, {"resolution", "family", "alpha", "lam", "q", "out"}),
    "decompose_check": ({"family"}, {"alpha", "lam", "q", "count", "max_n",
                                     "resolution", "tolerance", "seed", "out"}),
    "ratio_scan": ({"weights", "orders"}, {"cone", "candidate_L", "reps", "seed", "out"}),
    "divergence_search": ({"weights", "orders"}, {"cone", "reps", "seed", "out"}),
    "omega_sum_sweep": ({"weights", "orders"}, {"out"}),
    "witness_sweep": ({"etas"}, {"weights", "c0", "min_tolerance", "out"}),
    "prop2": ({"q", "kmax"}, {"c", "out"}),
    "vp_dichotomy": ({}, {"max_pow", "bounded_limit", "out"}),
    "mean_convergence": ({"family", "test_function"}, {"alpha", "lam", "q",
                                                       "resolution", "n_values", "out"}),
}


@dataclass(frozen=True)
class ExperimentDescriptor:
    """Validated descriptor: a kind plus its parameter mapping."""

    kind: str
    params: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentDescriptor":
        if not isinstance(raw, dict):
            raise DescriptorError(f"descriptor must be an object, got {type(raw)}")
        if "kind" not in raw:
            raise DescriptorError("descriptor missing 'kind'")
        kind = raw["kind"]
        if kind not in _KIND_FIELDS:
            raise DescriptorError(
                f"unknown kind {kind!r}; expected one of {sorted(_KIND_FIELDS)}"
            )
        required, optional = _KIND_FIELDS[kind]
        params = {k: v for k, v in raw.items() if k != "kind"}
        unknown = set(params) - required - optional
        if unknown:
            raise DescriptorError(f"{kind}: unknown fields {sorted(unknown)}")
        missing = required - set(params)
        if missing:
            raise DescriptorError(f"{kind}: missing required fields {sorted(missing)}")
        return cls(kind=kind, params=params)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentDescriptor":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _make_family(params: dict) -> SummabilityMatrix:
    family = params["family"]
    kwargs = {k: params[k] for k in _FAMILY_PARAM_KEYS if k in params}
    return make_matrix(family, **kwargs)


def parse_weights(spec: str) -> WeightFamily:
    """Weight-family tags: ones | harmonic | t3:<L> | tilde:<family>[:param]."""
    parts = spec.split(":")
    if parts[0] == "ones":
        return ones()
    if parts[0] == "harmonic":
        return harmonic()
    if parts[0] == "t3":
        return t3_family(float(parts[1]) if len(parts) > 1 else 2.0)
    if parts[0] == "tilde":
        if len(parts) < 2:
            raise DescriptorError("tilde weights need a matrix family")
        family = parts[1]
        kwargs: dict = {}
        if len(parts) > 2:
            arg = parts[2]
            if family == "cesaro":
                kwargs["alpha"] = arg if arg in ("inv_log2",) else float(arg)
            elif family == "vallee_poussin":
                kwargs["lam"] = arg
            elif family == "norlund":
                kwargs["q"] = arg
            else:
                raise DescriptorError(f"{family} takes no parameter")
        return from_matrix(make_matrix(family, **kwargs))
    raise DescriptorError(f"unknown weights spec {spec!r}")


def parse_cone(spec: str) -> ConeSpec:
    """Cone tags: kappa:<x> | omega:sqrt | omega:log2."""
    parts = spec.split(":")
    if parts[0] == "kappa":
        return ConeSpec.kappa_cone(float(parts[1]) if len(parts) > 1 else 0.5)
    if parts[0] == "omega":
        named = {
            "sqrt": lambda n: max(1, math.isqrt(WalshIndex(n).order)),
            "log2": lambda n: max(1, int(math.log2(max(2, WalshIndex(n).order)))),
        }
        tag = parts[1] if len(parts) > 1 else "sqrt"
        if tag not in named:
            raise DescriptorError(f"unknown omega cone tag {tag!r}")
        return ConeSpec.omega_cone(named[tag])
    raise DescriptorError(f"unknown cone spec {spec!r}")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_sidecar(path: Path, desc: ExperimentDescriptor, seed: int,
                   extra: dict | None = None) -> None:
    payload = {
        "descriptor": desc.to_dict(),
        "seed": seed,
        "prng": PRNG_NAME,
        "walshlab_version": __version__,
    }
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass
class RunContext:
    out_dir: Path
    resolution: int | None = None
    seed: int | None = None

    def resolve(self, params: dict, key: str, default):
        if key in params:
            return params[key]
        override = getattr(self, key, None)
        return default if override is None else override


# ---------------------------------------------------------------------------
# experiment implementations: each returns (exit_code, summary_line)
# ---------------------------------------------------------------------------

def _exp_kernel_dump(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    n = int(p["n"])
    resolution = int(ctx.resolve(p, "resolution", max(8, n.bit_length())))
    kind = p["kernel"]
    if kind == "dirichlet":
        grid = dirichlet(n, resolution)
    elif kind == "fejer":
        grid = fejer_sum(n, resolution)
    elif kind == "walsh":
        grid = walsh(n, resolution)
    elif kind == "rademacher":
        grid = rademacher(n, resolution)
    elif kind == "matrix":
        grid = kernel(_make_family(p), n, resolution)
    else:
        raise DescriptorError(f"unknown kernel {kind!r}")
    out = ctx.out_dir / p.get("out", f"kernel_{kind}_{n}.csv")
    write_grid_csv(grid, out)
    _write_sidecar(out.with_suffix(".json"), desc, seed=0,
                   extra={"label": grid.label, "l1": norms(grid).l1})
    return EXIT_OK, f"kernel_dump {kind}({n}) N={resolution} -> {out.name}"


def _exp_decompose_check(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    matrix = _make_family(p)
    resolution = int(ctx.resolve(p, "resolution", 10))
    count = int(p.get("count", 20))
    max_n = int(p.get("max_n", 1 << (resolution - 1)))
    tol = float(p.get("tolerance", 1e-8))
    seed = int(ctx.resolve(p, "seed", 0))
    rng = np.random.default_rng(seed)
    ns = sorted(set(int(v) for v in rng.integers(1, max_n, size=count)))
    rows = []
    worst = 0.0
    first_bad = None
    for n in ns:
        v = kernel(matrix, n, resolution)
        v1, v2, v3 = decompose(matrix, n, resolution)
        lhs = (walsh(n, resolution) * v).samples
        scale = max(np.abs(v.samples).max(), 1e-300)
        err = float(np.abs((v1 + v2 + v3).samples - lhs).max() / scale)
        worst = max(worst, err)
        if err > tol and first_bad is None:
            first_bad = n
        rows.append([n, WalshIndex(n).order, err])
    out = ctx.out_dir / p.get("out", f"decompose_{matrix.id}.csv")
    _write_csv(out, ["n", "order", "rel_error"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed,
                   extra={"max_rel_error": worst, "tolerance": tol})
    if first_bad is not None:
        return (EXIT_TOLERANCE,
                f"decompose_check {matrix.id}: FAIL rel_err={worst:.3e} at n={first_bad} "
                f"(tol {tol:g})")
    return EXIT_OK, f"decompose_check {matrix.id}: max_rel_err={worst:.3e} over {len(ns)} n"


def _exp_ratio_scan(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    weights = parse_weights(p["weights"])
    cone = parse_cone(p.get("cone", "kappa:0.5"))
    lo, hi = (int(v) for v in p["orders"])
    seed = int(ctx.resolve(p, "seed", 0))
    scan = cone_ratio_scan(weights, cone, range(lo, hi + 1),
                           candidate_L=float(p.get("candidate_L", 1.0)),
                           reps=int(p.get("reps", 0)), seed=seed)
    rows = [[r.order, r.n_count, r.ratio_min, r.ratio_max, r.ratio_mean,
             r.max_deviation] for r in scan.rows]
    out = ctx.out_dir / p.get("out", f"ratio_scan_{weights.id}.csv")
    _write_csv(out, ["order", "n_count", "ratio_min", "ratio_max", "ratio_mean",
                     "max_deviation"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed,
                   extra={"trend_decreasing": scan.deviation_trend_decreasing,
                          "final_deviation": scan.final_deviation()})
    return EXIT_OK, (f"ratio_scan {weights.id}: final max|ratio-{scan.candidate_L:g}| = "
                     f"{scan.final_deviation():.4f} "
                     f"({'shrinking' if scan.deviation_trend_decreasing else 'not shrinking'})")


def _exp_divergence_search(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    weights = parse_weights(p["weights"])
    cone = parse_cone(p.get("cone", "kappa:0.5"))
    lo, hi = (int(v) for v in p["orders"])
    seed = int(ctx.resolve(p, "seed", 0))
    res = divergence_search(weights, cone, range(lo, hi + 1),
                            reps=int(p.get("reps", 0)), seed=seed)
    rows = [[n, WalshIndex(n).order, g, variation_sum(weights, n),
             omega_sum(weights, n), weights.omega(WalshIndex(n).order - g, n)]
            for n, g in sorted(res.gamma.items())]
    out = ctx.out_dir / p.get("out", f"divergence_{weights.id}.csv")
    _write_csv(out, ["n", "order", "gamma", "variation_sum", "omega_sum",
                     "lme_value"], rows)
    out.with_suffix(".json").write_text(res.to_json() + "\n")
    state = "sequence found" if res.found else "refusal"
    return EXIT_OK, (f"divergence_search {weights.id}: {state}, "
                     f"c={res.c_empirical:.4f}, "
                     f"inf gamma {res.per_order_inf[0][1]} -> {res.per_order_inf[-1][1]}")


def _exp_omega_sum_sweep(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    weights = parse_weights(p["weights"])
    lo, hi = (int(v) for v in p["orders"])
    rows = []
    for m in range(lo, hi + 1):
        n = 1 << m
        rows.append([n, m, variation_sum(weights, n), omega_sum(weights, n)])
    out = ctx.out_dir / p.get("out", f"omega_sum_{weights.id}.csv")
    _write_csv(out, ["n", "order", "variation_sum", "omega_sum"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed=0)
    return EXIT_OK, (f"omega_sum_sweep {weights.id}: "
                     f"sum at order {hi} = {rows[-1][3]:.4f}")


def _exp_witness_sweep(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    weights = parse_weights(p.get("weights", "ones"))
    etas = [int(v) for v in p["etas"]]
    c0 = float(p.get("c0", 0.3))
    min_tol = float(p.get("min_tolerance", 1e-9))
    rows = []
    bad = None
    for eta in etas:
        params = block_params(8 * eta, lambda m: m)
        if params.eta != eta:
            raise DescriptorError(f"scale 8*{eta} did not produce eta={eta}")
        rep = witness_eval(params, weights, lambda_c0=c0)
        rows.append([rep.a, rep.eta, rep.l1_norm, rep.e_a_measure, rep.min_on_ea,
                     rep.median_on_ea, rep.weak_ratio, rep.lambda_threshold,
                     rep.c_empirical, rep.closed_form_max_err])
        floor = math.sqrt(eta) / 3.0 * rep.c_empirical - min_tol
        if rep.closed_form_max_err > min_tol or rep.min_on_ea < floor:
            bad = bad or eta
    out = ctx.out_dir / p.get("out", f"witness_{weights.id}.csv")
    _write_csv(out, ["a", "eta", "l1_norm", "e_a_measure", "min_on_Ea",
                     "median_on_Ea", "weak_ratio", "lambda", "c_empirical",
                     "closed_form_max_err"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed=0)
    if bad is not None:
        return EXIT_TOLERANCE, f"witness_sweep: FAIL at eta={bad}"
    ratios = [f"{r[6]:.3f}" for r in rows]
    return EXIT_OK, f"witness_sweep etas={etas}: weak ratios {ratios}"


def _exp_prop2(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    kmax = int(p["kmax"])
    qspec = p["q"]
    if isinstance(qspec, list):
        a = np.asarray(qspec, dtype=np.float64)
    else:
        matrix = make_matrix("norlund", q=qspec)
        a = np.array([matrix.q_partial(1 << k) for k in range(kmax + 1)])
    res = prop2_search(a, c=float(p.get("c", 0.5)))
    rows = [[n, g] for n, g in res.pairs]
    out = ctx.out_dir / p.get("out", "prop2.csv")
    _write_csv(out, ["n_j", "gamma_j"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed=0, extra={
        "c": res.c,
        "exhausted_at": res.exhausted_at,
        "bound_certificate": res.bound_certificate,
    })
    if res.exhausted_at is None:
        return EXIT_OK, f"prop2 q={qspec}: all {len(res.pairs)} depths realized"
    return EXIT_OK, (f"prop2 q={qspec}: exhausted at m={res.exhausted_at}, "
                     f"sup A_n/a_n = {res.bound_certificate:.4f}")


def _exp_vp_dichotomy(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    max_pow = int(p.get("max_pow", 16))
    bounded_limit = float(p.get("bounded_limit", 10.0))
    wide = make_matrix("vallee_poussin", lam="half")
    narrow = make_matrix("vallee_poussin", lam="sqrt")
    rows = []
    sup_wide = 0.0
    for n in range(2, (1 << max_pow) + 1):
        sup_wide = max(sup_wide, boundedness_index(wide, n))
    for m in range(2, max_pow + 1):
        n = 1 << m
        rows.append([n, m, boundedness_index(wide, n), boundedness_index(narrow, n)])
    out = ctx.out_dir / p.get("out", "vp_dichotomy.csv")
    _write_csv(out, ["n", "order", "index_half", "index_sqrt"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed=0,
                   extra={"sup_index_half": sup_wide, "bounded_limit": bounded_limit})
    if sup_wide > bounded_limit:
        return (EXIT_TOLERANCE,
                f"vp_dichotomy: sup index for lam=n/2 is {sup_wide:.3f} > {bounded_limit}")
    return EXIT_OK, (f"vp_dichotomy: sup index(half)={sup_wide:.3f} <= {bounded_limit}; "
                     f"index(sqrt) at order {max_pow} = {rows[-1][3]:.3f}")


def _parse_test_function(spec: str, resolution: int) -> DyadicGrid:
    parts = spec.split(":")
    size = 1 << resolution
    if parts[0] == "walsh":
        return walsh(int(parts[1]), resolution)
    if parts[0] == "step":
        frac = float(parts[1]) if len(parts) > 1 else 1.0 / 3.0
        cut = max(1, min(size, round(frac * size)))
        v = np.zeros(size)
        v[:cut] = 1.0
        return DyadicGrid(resolution, v, label=f"step({frac:g})")
    if parts[0] == "sawtooth":
        return DyadicGrid(resolution, np.arange(size) / size, label="sawtooth")
    raise DescriptorError(f"unknown test function {spec!r}")


def _exp_mean_convergence(desc: ExperimentDescriptor, ctx: RunContext):
    p = desc.params
    matrix = _make_family(p)
    resolution = int(ctx.resolve(p, "resolution", 10))
    f = _parse_test_function(p["test_function"], resolution)
    if "n_values" in p:
        ns = [int(v) for v in p["n_values"]]
    else:
        ns = [1 << k for k in range(1, resolution + 1)]
    rows = []
    for n in ns:
        g = mean(matrix, f, n) if n < f.size else partial_sum(f, f.size)
        diff = g - f
        gn = norms(diff)
        rows.append([n, WalshIndex(n).order, gn.l1, gn.linf])
    out = ctx.out_dir / p.get("out", f"mean_convergence_{matrix.id}.csv")
    _write_csv(out, ["n", "order", "l1_error", "max_error"], rows)
    _write_sidecar(out.with_suffix(".json"), desc, seed=0,
                   extra={"test_function": f.label})
    return EXIT_OK, (f"mean_convergence {matrix.id} on {f.label}: "
                     f"L1 err {rows[0][2]:.4f} -> {rows[-1][2]:.4f}")


_EXPERIMENTS = {
    "kernel_dump": _exp_kernel_dump,
    "decompose_check": _exp_decompose_check,
    "ratio_scan": _exp_ratio_scan,
    "divergence_search": _exp_divergence_search,
    "omega_sum_sweep": _exp_omega_sum_sweep,
    "witness_sweep": _exp_witness_sweep,
    "prop2": _exp_prop2,
    "vp_dichotomy": _exp_vp_dichotomy,
    "mean_convergence": _exp_mean_convergence,
}


def run_descriptor(desc: ExperimentDescriptor, ctx: RunContext) -> int:
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    code, summary = _EXPERIMENTS[desc.kind](desc, ctx)
    print(summary)
    return code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walshlab",
        description="dyadic Walsh analysis experiments",
    )
    parser.add_argument("--resolution", type=int, default=None,
                        help="default grid resolution N (2^N samples)")
    parser.add_argument("--seed", type=int, default=None, help="default PRNG seed")
    parser.add_argument("--out-dir", default=".", help="artifact directory")
    parser.add_argument("--cap", type=int, default=None,
                        help=f"resolution cap override (also {CAP_ENV_VAR})")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", help="run a JSON experiment descriptor") \
        .add_argument("descriptor", help="path to descriptor JSON")

    k = sub.add_parser("kernel", help="dump a kernel grid to CSV")
    k.add_argument("--kind", required=True,
                   choices=["dirichlet", "fejer", "walsh", "rademacher", "matrix"])
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--family", default=None)
    k.add_argument("--alpha", default=None)
    k.add_argument("--lam", default=None)
    k.add_argument("--q", default=None)
    k.add_argument("--out", default=None)

    d = sub.add_parser("decompose-check", help="verify the V1+V2+V3 identity")
    d.add_argument("--family", required=True)
    d.add_argument("--alpha", default=None)
    d.add_argument("--lam", default=None)
    d.add_argument("--q", default=None)
    d.add_argument("--count", type=int, default=20)
    d.add_argument("--max-n", type=int, default=None)
    d.add_argument("--tolerance", type=float, default=1e-8)
    d.add_argument("--out", default=None)

    r = sub.add_parser("ratio-scan", help="cone ratio statistics per order")
    r.add_argument("--weights", required=True)
    r.add_argument("--cone", default="kappa:0.5")
    r.add_argument("--orders", required=True, help="LO:HI (inclusive)")
    r.add_argument("--candidate-L", type=float, default=1.0)
    r.add_argument("--reps", type=int, default=0)
    r.add_argument("--out", default=None)

    g = sub.add_parser("divergence-search", help="constructive gamma search")
    g.add_argument("--weights", required=True)
    g.add_argument("--cone", default="kappa:0.5")
    g.add_argument("--orders", required=True, help="LO:HI (inclusive)")
    g.add_argument("--reps", type=int, default=0)
    g.add_argument("--out", default=None)

    w = sub.add_parser("witness", help="block-construction witness sweep")
    w.add_argument("--etas", required=True, help="comma list, e.g. 4,6,8")
    w.add_argument("--weights", default="ones")
    w.add_argument("--c0", type=float, default=0.3)
    w.add_argument("--out", default=None)

    p2 = sub.add_parser("prop2", help="Nörlund divergence-depth search")
    p2.add_argument("--q", required=True, help="q tag (ones|one_over_k1|pow2)")
    p2.add_argument("--kmax", type=int, default=20)
    p2.add_argument("--c", type=float, default=0.5)
    p2.add_argument("--out", default=None)

    v = sub.add_parser("vp-dichotomy", help="de la Vallée Poussin index dichotomy")
    v.add_argument("--max-pow", type=int, default=16)
    v.add_argument("--out", default=None)

    wn = sub.add_parser("weaknorm", help="Doob maximal weak-(1,1) scan")
    wn.add_argument("--count", type=int, default=100)
    wn.add_argument("--out", default=None)
    return parser


def _descriptor_from_args(args: argparse.Namespace) -> ExperimentDescriptor:
    def fam_params() -> dict:
        out = {}
        for key in _FAMILY_PARAM_KEYS:
            val = getattr(args, key, None)
            if val is not None:
                if key == "alpha":
                    try:
                        val = float(val)
                    except ValueError:
                        pass
                out[key] = val
        return out

    cmd = args.command
    if cmd == "kernel":
        p: dict = {"kernel": args.kind, "n": args.n, **fam_params()}
        if args.kind == "matrix":
            if args.family is None:
                raise DescriptorError("matrix kernel dump needs --family")
            p["family"] = args.family
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "kernel_dump", **p})
    if cmd == "decompose-check":
        p = {"family": args.family, **fam_params(), "count": args.count,
             "tolerance": args.tolerance}
        if args.max_n is not None:
            p["max_n"] = args.max_n
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "decompose_check", **p})
    if cmd == "ratio-scan":
        lo, hi = args.orders.split(":")
        p = {"weights": args.weights, "cone": args.cone,
             "orders": [int(lo), int(hi)], "candidate_L": args.candidate_L,
             "reps": args.reps}
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "ratio_scan", **p})
    if cmd == "divergence-search":
        lo, hi = args.orders.split(":")
        p = {"weights": args.weights, "cone": args.cone,
             "orders": [int(lo), int(hi)], "reps": args.reps}
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "divergence_search", **p})
    if cmd == "witness":
        p = {"etas": [int(v) for v in args.etas.split(",")],
             "weights": args.weights, "c0": args.c0}
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "witness_sweep", **p})
    if cmd == "prop2":
        p = {"q": args.q, "kmax": args.kmax, "c": args.c}
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "prop2", **p})
    if cmd == "vp-dichotomy":
        p = {"max_pow": args.max_pow}
        if args.out:
            p["out"] = args.out
        return ExperimentDescriptor.from_dict({"kind": "vp_dichotomy", **p})
    raise DescriptorError(f"no descriptor mapping for {cmd}")


def _cmd_weaknorm(args: argparse.Namespace, ctx: RunContext) -> int:
    count = args.count
    resolution = ctx.resolution if ctx.resolution is not None else 12
    seed = ctx.seed if ctx.seed is not None else 0
    rng = np.random.default_rng(seed)
    rows = []
    violations = 0
    for i in range(count):
        f = DyadicGrid(resolution, rng.random(1 << resolution))
        star = doob_max(f)
        l1 = norms(f).l1
        wk = weak_l1(star)
        ok = wk <= l1 + 1e-12
        violations += 0 if ok else 1
        rows.append([i, l1, wk, wk / l1, int(ok)])
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    out = ctx.out_dir / (args.out or "weaknorm_doob.csv")
    _write_csv(out, ["f_index", "l1", "weak_l1_doob", "ratio", "ok"], rows)
    out.with_suffix(".json").write_text(json.dumps({
        "operator": "doob_max",
        "count": count,
        "resolution": resolution,
        "seed": seed,
        "prng": PRNG_NAME,
        "violations": violations,
    }, indent=2, sort_keys=True) + "\n")
    print(f"weaknorm doob: {count} functions at N={resolution}, "
          f"{violations} violations")
    return EXIT_OK if violations == 0 else EXIT_TOLERANCE


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.cap is not None:
        set_resolution_cap(args.cap)
    ctx = RunContext(out_dir=Path(args.out_dir), resolution=args.resolution,
                     seed=args.seed)
    try:
        if args.command == "weaknorm":
            return _cmd_weaknorm(args, ctx)
        if args.command == "run":
            desc = ExperimentDescriptor.load(args.descriptor)
        else:
            desc = _descriptor_from_args(args)
        return run_descriptor(desc, ctx)
    except (DescriptorError, MatrixParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
