"""Command-line harness: ``grushin <subcommand> --n N [options]``.

Every subcommand builds flat records, runs its checks, writes the records as
JSON or CSV (stdout unless ``--out``) and prints one summary line per check to
stderr.  Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input.
"""
from __future__ import annotations

import argparse
from dataclasses import asdict, dataclass, field
import math
import sys
from typing import Optional

import numpy as np

from .errors import GrushinError, ParameterError
from .report import derive_seed, emit_report

SUBCOMMANDS = ("basis", "project", "multiplier", "carleman", "solve", "vanish", "heisenberg")
DEFAULT_S = (100.5, 200.5, 400.5, 800.5)


@dataclass
class ExperimentConfig:
    subcommand: str
    N: int
    s: tuple = DEFAULT_S
    delta: float = 0.1
    epsilon: float = 0.3
    alpha: Optional[float] = None
    kmax: Optional[int] = None
    grid: Optional[int] = None
    seed: int = 0
    variant: Optional[str] = None
    trials: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ParameterError(f"unknown subcommand {self.subcommand!r}")
        if self.N < 1:
            raise ParameterError("--n must be positive")
        if self.format not in ("json", "csv"):
            raise ParameterError("--format must be json or csv")
        if self.kmax is not None and self.kmax < 0:
            raise ParameterError("--kmax must be nonnegative")
        if self.grid is not None and self.grid < 1:
            raise ParameterError("--grid must be positive")
        if self.trials is not None and self.trials < 1:
            raise ParameterError("trials must be positive")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("--seed must be a 64-bit unsigned integer")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _fmt(x) -> str:
    return "none" if x is None else f"{x:.3e}"


# ---------------------------------------------------------------------------
# subcommands

def run_basis(cfg: ExperimentConfig):
    from .spectral import SphereGrid, direct_sum_check, eigen_residual, mode_indices

    N = cfg.N
    if N not in (2, 3):
        raise ParameterError("basis checks run for N in {2, 3}")
    K = 12 if cfg.kmax is None else cfg.kmax
    n_fd = cfg.grid or 256
    grid = SphereGrid(N, max(K // 2 + 4, 8), max(K, 1))
    recs = []
    worst_s = worst_fd = 0.0
    for idx in mode_indices(N, K):
        rs = eigen_residual(idx, grid)
        rf = eigen_residual(idx, grid, "finite_difference", n_fd)
        worst_s, worst_fd = max(worst_s, rs), max(worst_fd, rf)
        recs.append({"check": "eigen_residual", "N": N, "k": idx.k, "l": idx.l, "j": idx.j,
                     "spectral": rs, "finite_difference": rf, "fd_nodes": n_fd})
    ds = direct_sum_check(N, max(K, 1), 50, derive_seed(cfg.seed, "basis/direct_sum"))
    recs.append({"check": "direct_sum", **ds.record()})
    return recs, [
        Check("eigen_residual_spectral", worst_s <= 1e-8, f"max {_fmt(worst_s)} <= 1e-8"),
        Check("eigen_residual_fd", worst_fd <= 1e-4, f"max {_fmt(worst_fd)} <= 1e-4 ({n_fd} nodes)"),
        Check("direct_sum", ds.worst <= 1e-10, f"max deviation {_fmt(ds.worst)} <= 1e-10"),
    ]


def run_project(cfg: ExperimentConfig):
    from .spectral import weighted_projection_constant

    N = cfg.N
    if cfg.alpha is None:
        alphas = [0.0, 0.45 if N % 2 == 0 else 0.37]
    else:
        alphas = [cfg.alpha]
    K = 20 if cfg.kmax is None else cfg.kmax
    recs, checks = [], []
    for a in alphas:
        rep = weighted_projection_constant(N, a, K, cfg.trials or 100, derive_seed(cfg.seed, f"project/{a!r}"))
        rec = {"check": "weighted_projection", **rep.record()}
        recs.append(rec)
        finite = math.isfinite(rep.exact_sup) and math.isfinite(rep.empirical)
        checks.append(Check(f"projection_stable[alpha={a:g}]", finite and rep.relative_change <= 0.05,
                            f"C={rep.exact_sup:.6g} change {_fmt(rep.relative_change)} <= 5e-2"))
        if a == 0.0:
            top = max(rep.exact_sup, rep.empirical)
            checks.append(Check("projection_unweighted", top <= 1 + 1e-10, f"C={top!r} <= 1+1e-10"))
    return recs, checks


def run_multiplier(cfg: ExperimentConfig):
    from .multiplier import (
        MultiplierParams, band_partition, kernel_sweep, min_modulus_scan, partition_deviation,
    )

    N = cfg.N
    s_values = list(cfg.s)
    recs = []
    worst_mod, worst_pou = math.inf, 0.0
    for s in s_values:
        params = MultiplierParams(s, N)
        fam = band_partition(params)
        k_max = cfg.kmax if cfg.kmax is not None else int(4 * s)
        etas = np.concatenate([[0.0], np.geomspace(1e-3, 40 * s, cfg.grid or 401)])
        ratio, _ = min_modulus_scan(params, k_max, np.concatenate([-etas[::-1], etas]))
        pou = partition_deviation(fam, np.geomspace(1e-6, 4.0 * 2.0**fam.m, 20001))
        worst_mod, worst_pou = min(worst_mod, ratio), max(worst_pou, pou)
        recs.append({"check": "symbol", "s": s, "N": N, "m": fam.m, "min_modulus_ratio": ratio,
                     "partition_deviation": pou})
    sweep = kernel_sweep(s_values, N)
    for s, reps in zip(s_values, sweep.per_band):
        for r in reps:
            recs.append({"check": "band_kernel", **asdict(r), "scaled": r.scaled})
    for s, agg, sc in zip(s_values, sweep.aggregate, sweep.aggregate_scaled):
        recs.append({"check": "aggregate", "s": s, "aggregate": agg, "aggregate_scaled": sc})
    recs.append({"check": "sweep", "band_spread": sweep.band_spread,
                 "aggregate_spread": sweep.aggregate_spread, "slope": sweep.slope})
    return recs, [
        Check("min_modulus", worst_mod >= 1 - 1e-12, f"min |a_s|/(|s-k|(s+k+N)) = {worst_mod:.12g} >= 1"),
        Check("partition_of_unity", worst_pou <= 1e-12, f"max deviation {_fmt(worst_pou)} <= 1e-12"),
        Check("band_constant", sweep.band_spread <= 2.0, f"per-band s*L1 spread {sweep.band_spread:.4f} <= 2"),
        Check("aggregate_constant", sweep.aggregate_spread <= 2.0,
              f"aggregate s*L1/log2(s) spread {sweep.aggregate_spread:.4f} <= 2"),
    ]


VARIANT_NAMES = {
    "l2-even": "L2_even", "l2-odd": "L2_odd", "lplq-even": "LpLq_even", "lplq-odd": "LpLq_odd",
}


def parse_variant(name: Optional[str], N: int) -> str:
    from .carleman import VARIANTS

    if name is None:
        return "L2_odd" if N % 2 else "L2_even"
    if name in VARIANTS:
        return name
    key = name.lower().replace("_", "-")
    if key not in VARIANT_NAMES:
        raise ParameterError(f"unknown variant {name!r}")
    return VARIANT_NAMES[key]


def run_carleman(cfg: ExperimentConfig):
    from .carleman import constant_sweep, standard_family

    N = cfg.N
    variant = parse_variant(cfg.variant, N)
    seed = derive_seed(cfg.seed, "carleman/family")
    fit = constant_sweep(lambda s: standard_family(N, s, seed), list(cfg.s), cfg.delta, variant, N, cfg.grid)
    recs = []
    for reps in fit.reports:
        for i, r in enumerate(reps):
            recs.append({"check": "carleman_ratio", "member": i, **asdict(r)})
    recs.append({"check": "sweep", "variant": variant, "N": N, "delta": cfg.delta, "C": fit.C,
                 "residual": fit.residual, "loo_spread": fit.loo_spread, "ratio_spread": fit.ratio_spread,
                 "decays": fit.decays(), "max_ratio": fit.max_ratio, "argmax": fit.argmax})
    flagged = sum(1 for reps in fit.reports for r in reps if r.flag == "potential_counterexample")
    checks = [Check("no_counterexample", flagged == 0, f"{flagged} flagged evaluations")]
    if variant.startswith("L2"):
        members = fit.member_decay()
        checks += [
            Check("max_ratio_decays", fit.decays(), "max ratio nonincreasing in s"),
            Check("member_decay", all(members), f"{sum(members)}/{len(members)} members decay"),
            Check("fit_stable", fit.loo_spread <= 2.0, f"C={fit.C:.6g} leave-one-out spread {fit.loo_spread:.4f} <= 2"),
        ]
    else:
        checks.append(Check("ratio_bounded", fit.ratio_spread <= 4.0,
                            f"max/min of max ratio {fit.ratio_spread:.4f} <= 4"))
    return recs, checks


def _solve_profiles():
    return [
        ("constant", lambda r: np.full_like(np.asarray(r, dtype=float), 2.0)),
        ("linear", lambda r: -1.5 * np.asarray(r, dtype=float)),
        ("oscillating", lambda r: np.cos(3.0 * np.asarray(r, dtype=float)) + 0.5),
    ]


def run_solve(cfg: ExperimentConfig):
    from .solver import (
        AnnulusProblem, coupled_galerkin_solve, mode_ode_solve, relative_l2_difference, sin_potential, solve_modes,
    )
    from .spectral import SpectralCoefficients, mode_indices

    N = cfg.N
    K = 16 if cfg.kmax is None else cfg.kmax
    res = cfg.grid or 64
    r0, r1 = 0.5, 1.5
    rng = np.random.default_rng(derive_seed(cfg.seed, "solve/boundary"))
    low = [i for i in mode_indices(N, min(6, K), zonal=N > 3)]
    inner = SpectralCoefficients(N, K, {i: float(rng.standard_normal()) for i in low}, N > 3)
    outer = SpectralCoefficients(N, K, {i: float(rng.standard_normal()) for i in low}, N > 3)
    recs, worst = [], 0.0
    for label, W in _solve_profiles():
        prob = AnnulusProblem(N, r0, r1, sin_potential(W, label), inner, outer, K, res)
        a = coupled_galerkin_solve(prob)
        b = solve_modes(prob)
        d = relative_l2_difference(a, b)
        worst = max(worst, d)
        recs.append({"check": "oracle_equivalence", "profile": label, "N": N, "K": K, "resolution": res,
                     "relative_l2": d, "condition": a.info["condition"], "tail_fraction": a.info["tail_fraction"]})
    euler = 0.0
    for k in range(0, min(K, 8) + 1):
        rho, chi, _, _ = mode_ode_solve(N, k, None, r0, r1, r0**k, r1**k, res)
        err = float(np.max(np.abs(chi - rho**k)) / np.max(np.abs(rho**k)))
        euler = max(euler, err)
        recs.append({"check": "euler", "k": k, "relative_max": err})
    return recs, [
        Check("oracle_equivalence", worst <= 1e-6, f"max relative L2 {_fmt(worst)} <= 1e-6"),
        Check("euler_exponent", euler <= 1e-8, f"max relative error {_fmt(euler)} <= 1e-8"),
    ]


def run_vanish(cfg: ExperimentConfig):
    from .potentials import PotentialDescriptor, verify_growth
    from .vanishing import (
        AngularProfile, DiniProfile, RadialLaw, SeparableField, critical_exponent, dini_check,
        equivalence_report, holder_psi_check, order_fit,
    )

    N = cfg.N
    recs, checks = [], []
    worst = 0.0
    for a in (1.0, 2.0, 5.0):
        fit = order_fit(SeparableField.power(N, a))
        err = abs(fit.slope - (2 * a + N + 2))
        worst = max(worst, err)
        recs.append({"check": "order_fit", "a": a, "expected": 2 * a + N + 2, **fit.record()})
    checks.append(Check("order_fit", worst <= 1e-3, f"max |slope - (2a+N+2)| {_fmt(worst)} <= 1e-3"))

    modes = [(0, 0, 0), (2, 0, 0), (3, 1, 0), (4, 2, 1)] if N in (2, 3) else [(0, 0, 0), (2, 0, 0)]
    fams = [SeparableField(N, RadialLaw("power", a), AngularProfile("mode", m)) for a, m in zip((0.5, 1.0, 2.0, 3.5), modes)]
    fams.append(SeparableField(N, RadialLaw("power", 1.5), AngularProfile("sin_power", c=0.7)))
    worst = 0.0
    for i, u in enumerate(fams):
        rep = equivalence_report(u)
        worst = max(worst, rep.slope_difference)
        recs.append({"check": "equivalence", "member": i, **rep.record()})
    checks.append(Check("psi_equivalence", worst <= 1e-6, f"max slope difference {_fmt(worst)} <= 1e-6"))

    qs = critical_exponent(N)
    qgrid = [2 + (qs - 2) * f for f in (0.1, 0.5, 0.9)]
    ok = True
    for i, u in enumerate(fams):
        for q in qgrid:
            for r in (0.25, 1.0):
                h = holder_psi_check(u, r, q)
                ok &= h.holds
                recs.append({"check": "holder", "member": i, **h.record()})
    checks.append(Check("holder_psi", ok, f"{len(fams) * len(qgrid) * 2} cases"))

    named = [
        ("r^0.5", DiniProfile("power", 0.5), "dini", math.sqrt(2.0)),
        ("log^-2", DiniProfile("log_power", 2.0), "dini", 1.0 / math.log(2.0)),
        ("log^-1", DiniProfile("log_power", 1.0), "not_dini", math.inf),
    ]
    good = True
    for name, prof, want, exact in named:
        rep = dini_check(prof, R0=0.5)
        match = rep.classification == want and (
            not math.isfinite(exact) or abs(rep.value - exact) <= 1e-6 * exact)
        good &= match
        recs.append({"check": "dini", "family": name, "expected": want, "exact": exact, "match": match, **rep.record()})
    checks.append(Check("dini_classification", good, "3 named families"))

    eps = cfg.epsilon
    desc = PotentialDescriptor("psi_hardy", 1.0, eps, N=N)
    g = verify_growth(desc, N=N, count=20_000, seed=derive_seed(cfg.seed, "vanish/growth"))
    recs.append({"check": "potential_growth", "eps": eps, **g.record()})
    checks.append(Check("potential_round_trip", g.satisfied, f"max ratio {g.max_ratio!r}"))
    return recs, checks


def run_heisenberg(cfg: ExperimentConfig):
    from .heisenberg import (
        bracket_residual, gauge_radial_crosscheck, is_torus_invariant, random_torus_family,
        reduction_constant, reduction_residual, sample_points,
    )

    n = cfg.N
    if n not in (1, 2):
        raise ParameterError("heisenberg checks run for n in {1, 2}")
    count = cfg.trials or 200
    funcs, expected = random_torus_family(n, count, derive_seed(cfg.seed, "heisenberg/family"))
    x, y, t = sample_points(n, 24, derive_seed(cfg.seed, "heisenberg/points"))
    recs = []
    worst_b, worst_r, agree, correct = 0.0, 0.0, 0, 0
    for i, (u, want) in enumerate(zip(funcs, expected)):
        b = bracket_residual(u, x, y, t) if i < 20 else None
        if b is not None:
            worst_b = max(worst_b, b)
        tr = is_torus_invariant(u, x, y, t)
        agree += tr.agree
        correct += tr.invariant == want
        rec = {"check": "torus", "member": i, "expected": want, **tr.record(), "bracket": b}
        if tr.invariant:
            rr = reduction_residual(u, x, y, t)
            worst_r = max(worst_r, rr.relative)
            rec["reduction_relative"] = rr.relative
        recs.append(rec)
    cross = gauge_radial_crosscheck(n, seed=derive_seed(cfg.seed, "heisenberg/cross") % 2**32)
    recs.append({"check": "gauge_radial", **cross.record(), "relative": cross.relative})
    return recs, [
        Check("bracket", worst_b <= 1e-10, f"max residual {_fmt(worst_b)} <= 1e-10"),
        Check("torus_agreement", agree == len(funcs) and correct == len(funcs),
              f"{agree}/{len(funcs)} agree, {correct}/{len(funcs)} classified"),
        Check("reduction", worst_r <= 1e-6, f"c={reduction_constant():g} max relative {_fmt(worst_r)} <= 1e-6"),
        Check("gauge_radial", cross.relative <= 1e-6, f"relative {_fmt(cross.relative)} <= 1e-6"),
    ]


RUNNERS: dict = {
    "basis": run_basis, "project": run_project, "multiplier": run_multiplier, "carleman": run_carleman,
    "solve": run_solve, "vanish": run_vanish, "heisenberg": run_heisenberg,
}


# ---------------------------------------------------------------------------
# argument handling

def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grushin", description="Numerical checks for the Grushin operator.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        q = sub.add_parser(name)
        q.add_argument("--n", type=int, required=True, help="dimension N (n for heisenberg)")
        q.add_argument("--s", type=_floats, help="comma-separated s values")
        q.add_argument("--delta", type=float)
        q.add_argument("--epsilon", type=float)
        q.add_argument("--alpha", type=float)
        q.add_argument("--kmax", type=int)
        q.add_argument("--grid", type=int, help="resolution (meaning depends on the subcommand)")
        q.add_argument("--seed", type=int)
        q.add_argument("--variant")
        q.add_argument("--out")
        q.add_argument("--format", choices=("json", "csv"))
        q.add_argument("--config", help="key=value file; explicit flags win")
    return p


_CONFIG_TYPES: dict = {
    "s": _floats, "delta": float, "epsilon": float, "alpha": float, "kmax": int, "grid": int,
    "seed": int, "variant": str, "trials": int, "out": str, "format": str,
}


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}")
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{no}: expected key=value")
        key, val = (v.strip() for v in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ParameterError(f"{path}:{no}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_TYPES[key](val)
        except (ValueError, argparse.ArgumentTypeError):
            raise ParameterError(f"{path}:{no}: bad value for {key}: {val!r}")
    return out


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    merged = read_config(args.config) if args.config else {}
    for key in _CONFIG_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    cfg = ExperimentConfig(args.subcommand, args.n, **merged)
    cfg.validate()
    return cfg


def run(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        records, checks = RUNNERS[cfg.subcommand](cfg)
    except GrushinError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {cfg.subcommand}.{c.name}: {c.detail}", file=stderr)
    try:
        text = emit_report(records, cfg.format, cfg.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=stderr)
        return 2
    if cfg.out is None or cfg.out == "-":
        stdout.write(text)
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
    except (GrushinError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
