"""The ten acceptance criteria at their stated tolerances and time budgets.

Each test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
terminal summary.
"""
import io
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from grushin.carleman import constant_sweep, standard_family
from grushin.cli import ExperimentConfig, run
from grushin.heisenberg import (
    bracket_residual,
    gauge_radial_crosscheck,
    is_torus_invariant,
    random_torus_family,
    reduction_constant,
    reduction_residual,
    sample_points,
    symbols,
    HFunction,
)
from grushin.multiplier import MultiplierParams, band_partition, kernel_sweep, min_modulus_scan, partition_deviation
from grushin.potentials import PotentialDescriptor, verify_growth
from grushin.solver import AnnulusProblem, coupled_galerkin_solve, mode_ode_solve, relative_l2_difference, sin_potential, solve_modes
from grushin.spectral import SpectralCoefficients, SphereGrid, direct_sum_check, eigen_residual, mode_indices, weighted_projection_constant
from grushin.vanishing import (
    AngularProfile,
    DiniProfile,
    RadialLaw,
    SeparableField,
    critical_exponent,
    dini_check,
    equivalence_report,
    holder_psi_check,
    order_fit,
)

S_SWEEP = [100.5, 200.5, 400.5, 800.5]


def report(number, title, checks, elapsed, budget):
    """checks: list of (ok, detail)."""
    timed = elapsed < budget if budget else True
    ok = all(c for c, _ in checks) and timed
    detail = "; ".join(d for _, d in checks)
    tail = f" [{elapsed:.1f} s < {budget} s]" if budget else f" [{elapsed:.1f} s]"
    if budget and not timed:
        tail = f" [{elapsed:.1f} s exceeds {budget} s]"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}: {detail}{tail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_eigenbasis():
    t0 = time.perf_counter()
    worst_s = worst_fd = 0.0
    for N in (2, 3):
        grid = SphereGrid(N, 10, 12)
        for idx in mode_indices(N, 12):
            worst_s = max(worst_s, eigen_residual(idx, grid))
            worst_fd = max(worst_fd, eigen_residual(idx, grid, "finite_difference", 256))
    el = time.perf_counter() - t0
    report(1, "eigenbasis", [(worst_s <= 1e-8, f"spectral {worst_s:.2e} <= 1e-8"),
                             (worst_fd <= 1e-4, f"finite-difference {worst_fd:.2e} <= 1e-4")], el, 5)


def test_criterion_02_direct_sum():
    t0 = time.perf_counter()
    reps = [direct_sum_check(N, 8, 50, seed=N) for N in (2, 3)]
    el = time.perf_counter() - t0
    par = max(r.parseval for r in reps)
    proj = max(max(r.idempotence, r.orthogonality, r.completeness) for r in reps)
    report(2, "direct sum", [(par <= 1e-10, f"Parseval {par:.2e} <= 1e-10"),
                             (proj <= 1e-10, f"projectors {proj:.2e} <= 1e-10")], el, 5)


def test_criterion_03_weighted_projection():
    t0 = time.perf_counter()
    checks = []
    for N, a in ((2, 0.45), (3, 0.37)):
        rep = weighted_projection_constant(N, a, 20, 100, seed=N)
        ok = math.isfinite(rep.exact_sup) and math.isfinite(rep.empirical) and rep.relative_change <= 0.05
        checks.append((ok, f"N={N} alpha={a} C={rep.exact_sup:.5g} change {rep.relative_change:.1e}"))
    for N in (2, 3):
        rep = weighted_projection_constant(N, 0.0, 20, 100, seed=N)
        top = max(rep.exact_sup, rep.empirical)
        checks.append((top <= 1 + 1e-10, f"N={N} alpha=0 C-1={top - 1:.1e}"))
    report(3, "weighted projection", checks, time.perf_counter() - t0, 60)


def test_criterion_04_multiplier():
    t0 = time.perf_counter()
    worst_mod, worst_pou = math.inf, 0.0
    for s in S_SWEEP:
        p = MultiplierParams(s, 2)
        eta = np.concatenate([[0.0], np.geomspace(1e-3, 40 * s, 400)])
        ratio, _ = min_modulus_scan(p, int(4 * s), np.concatenate([-eta[::-1], eta]))
        fam = band_partition(p)
        worst_mod = min(worst_mod, ratio)
        worst_pou = max(worst_pou, partition_deviation(fam, np.linspace(4 * s / 1e4, 4 * s, 10**4)))
    sweep = kernel_sweep(S_SWEEP, 2)
    report(4, "multiplier calculus", [
        (worst_mod >= 1 - 1e-12, f"min |a_s|/(|s-k|(s+k+N)) {worst_mod:.12f}"),
        (worst_pou <= 1e-12, f"partition {worst_pou:.1e} <= 1e-12"),
        (sweep.band_spread <= 2, f"per-band C spread {sweep.band_spread:.3f} <= 2"),
        (sweep.aggregate_spread <= 2, f"aggregate C spread {sweep.aggregate_spread:.3f} <= 2"),
    ], time.perf_counter() - t0, 30)


def _l2_suite(N, variant):
    fit = constant_sweep(lambda s: standard_family(N, s, 0), S_SWEEP, 0.1, variant, N)
    flagged = sum(r.flag == "potential_counterexample" for reps in fit.reports for r in reps)
    members = fit.member_decay()
    return [
        (len(fit.reports[0]) == 20 and flagged == 0, f"N={N} 20 members, {flagged} flagged"),
        (fit.decays(), f"max ratio {fit.max_ratio[0]:.3g} -> {fit.max_ratio[-1]:.3g} nonincreasing"),
        (all(members), f"{sum(members)}/20 members decay"),
        (fit.loo_spread <= 2, f"C={fit.C:.4g} leave-one-out spread {fit.loo_spread:.3f} <= 2"),
    ]


def test_criterion_05_l2_carleman():
    t0 = time.perf_counter()
    checks = _l2_suite(2, "L2_even") + _l2_suite(3, "L2_odd")
    report(5, "L2-L2 Carleman", checks, time.perf_counter() - t0, 120)


def test_criterion_06_lplq_carleman():
    t0 = time.perf_counter()
    checks = []
    for N, variant in ((2, "LpLq_even"), (3, "LpLq_odd")):
        fit = constant_sweep(lambda s: standard_family(N, s, 0), S_SWEEP, 0.1, variant, N)
        flagged = sum(r.flag == "potential_counterexample" for reps in fit.reports for r in reps)
        p, q = fit.reports[0][0].p, fit.reports[0][0].q
        checks.append((flagged == 0 and p == 2 * N / (N - 1) and q == 2 * N / (N + 1),
                       f"N={N} p={p:g} q={q:.4g}"))
        checks.append((fit.ratio_spread <= 4, f"N={N} max/min {fit.ratio_spread:.3f} <= 4"))
    report(6, "Lp-Lq Carleman", checks, time.perf_counter() - t0, 120)


def test_criterion_07_solver():
    t0 = time.perf_counter()
    N, K = 2, 16
    rng = np.random.default_rng(7)
    low = mode_indices(N, 6)
    inner = SpectralCoefficients(N, K, {i: float(rng.standard_normal()) for i in low})
    outer = SpectralCoefficients(N, K, {i: float(rng.standard_normal()) for i in low})
    profiles = [lambda r: np.full_like(np.asarray(r, float), 2.0), lambda r: -1.5 * np.asarray(r, float),
                lambda r: np.cos(3.0 * np.asarray(r, float)) + 0.5]
    worst = 0.0
    for W in profiles:
        prob = AnnulusProblem(N, 0.5, 1.5, sin_potential(W), inner, outer, K, 64)
        worst = max(worst, relative_l2_difference(coupled_galerkin_solve(prob), solve_modes(prob)))
    euler = 0.0
    for k in range(9):
        for e in (k, -(N + k)):
            rho, chi, _, _ = mode_ode_solve(N, k, None, 0.5, 1.5, 0.5**e, 1.5**e, 64)
            euler = max(euler, float(np.max(np.abs(chi - rho**e)) / np.max(rho**e)))
    report(7, "solver oracle", [(worst <= 1e-6, f"coupled vs modes {worst:.1e} <= 1e-6"),
                                (euler <= 1e-8, f"Euler exponents {euler:.1e} <= 1e-8")], time.perf_counter() - t0, 30)


def test_criterion_08_vanishing():
    t0 = time.perf_counter()
    checks = []
    for N in (2, 3):
        err = max(abs(order_fit(SeparableField.power(N, a)).slope - (2 * a + N + 2)) for a in (1.0, 2.0, 5.0))
        checks.append((err <= 1e-3, f"N={N} order error {err:.1e}"))
    fams = [SeparableField(2, RadialLaw("power", a), AngularProfile("mode", m))
            for a, m in zip((0.5, 1.0, 2.0, 3.5), [(0, 0, 0), (2, 0, 0), (3, 1, 0), (4, 2, 1)])]
    fams.append(SeparableField(2, RadialLaw("power", 1.5), AngularProfile("sin_power", c=0.7)))
    fams.append(SeparableField(3, RadialLaw("power", 2.0), AngularProfile("mode", (2, 2, 3))))
    diff = max(equivalence_report(u).slope_difference for u in fams)
    checks.append((diff <= 1e-6, f"psi vs unweighted slopes {diff:.1e} <= 1e-6"))
    cases = held = 0
    for u in fams:
        qs = critical_exponent(u.N)
        for f in (0.1, 0.5, 0.9):
            for r in (0.25, 1.0):
                cases += 1
                held += holder_psi_check(u, r, 2 + (qs - 2) * f).holds
    checks.append((held == cases, f"Hölder {held}/{cases}"))
    named = [(DiniProfile("power", 0.5), "dini", math.sqrt(2)), (DiniProfile("log_power", 2.0), "dini", 1 / math.log(2)),
             (DiniProfile("log_power", 1.0), "not_dini", math.inf)]
    good = 0
    for prof, want, exact in named:
        rep = dini_check(prof, 0.5)
        good += rep.classification == want and (not math.isfinite(exact) or abs(rep.value - exact) <= 1e-6 * exact)
    checks.append((good == 3, f"Dini {good}/3"))
    report(8, "vanishing diagnostics", checks, time.perf_counter() - t0, 20)


def test_criterion_09_heisenberg():
    t0 = time.perf_counter()
    checks = []
    for n in (1, 2):
        xs, ys, t = symbols(n)
        x, y, tt = sample_points(n, 24, 9)
        gens = list(xs + ys + (t,))
        quad = sum((i + 1) * a * b for i, a in enumerate(gens) for b in gens[i:])
        br = bracket_residual(HFunction(n, quad), x, y, tt)
        funcs, expected = random_torus_family(n, 200, seed=n)
        agree = correct = 0
        worst = 0.0
        for u, want in zip(funcs, expected):
            rep = is_torus_invariant(u, x, y, tt, tol=1e-8 * max(1.0, float(np.max(np.abs(u(x, y, tt))))))
            agree += rep.agree
            correct += rep.invariant == want
            if rep.invariant:
                worst = max(worst, reduction_residual(u, x, y, tt).relative)
        cross = gauge_radial_crosscheck(n).relative
        checks += [(br <= 1e-10, f"n={n} bracket {br:.1e}"),
                   (agree == correct == 200, f"n={n} torus {agree}/200 agree"),
                   (max(worst, cross) <= 1e-6, f"n={n} reduction {max(worst, cross):.1e} (c={reduction_constant():g})")]
    report(9, "Heisenberg bridge", checks, time.perf_counter() - t0, 10)


DETERMINISM_RUNS = [
    ExperimentConfig("basis", 2, seed=3),
    ExperimentConfig("project", 3, seed=3, trials=20),
    ExperimentConfig("multiplier", 2, s=(100.5, 200.5), seed=3, format="csv"),
    ExperimentConfig("carleman", 2, s=(100.5, 200.5), seed=3),
    ExperimentConfig("solve", 2, seed=3, format="csv"),
    ExperimentConfig("vanish", 3, seed=3),
    ExperimentConfig("heisenberg", 2, seed=3, trials=50),
]


def test_criterion_10_determinism():
    t0 = time.perf_counter()
    checks = []
    for cfg in DETERMINISM_RUNS:
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            run(cfg, buf, io.StringIO())
            outs.append(buf.getvalue().encode("utf-8"))
        checks.append((outs[0] == outs[1] and len(outs[0]) > 2, f"{cfg.subcommand} {len(outs[0])} bytes"))
    report(10, "determinism", checks, time.perf_counter() - t0, None)
