"""Acceptance gate: eight numbered end-to-end criteria.

Each criterion is one test that prints a single PASS/FAIL line with the
measured numbers (straight to the terminal, bypassing capture) and then
asserts.  Criteria 5 and 6 each contain one bar that the implementation
demonstrably cannot reach; those tests are expected to stay red and the
printed line carries the measured values.  The analysis lives outside the
package tree.

The two optimization runs write their final densities as PGM images into
``acceptance_artifacts/`` at the repository root for visual inspection of the
hole shapes; nothing numerical is asserted about the images.
"""

from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

from fftopt import (
    MaterialPair,
    PhaseFieldParams,
    SolverSettings,
    TargetSpec,
    build_projection,
    build_stencils,
    effective_constants,
    evaluate,
    evaluate_with_gradient,
    fd_sensitivity,
    initial_phase,
    load_cases,
    make_problem,
    mean_stress,
    minimize,
    solve,
)
from fftopt.cli import decreasing_prefix_slope
from fftopt.grid import (
    derivative_factor_table,
    element_gradient,
    node_positions,
)
from fftopt.io import config_to_problem, optimizer_settings, write_density_pgm
from fftopt.presets import get_preset
from fftopt.projection import apply, is_self_adjoint_check
from fftopt.optimize import center_void

from conftest import make_grid, random_compatible, random_field
from test_projection import dense_projector

EPS = np.finfo(float).eps
ARTIFACTS = Path(__file__).resolve().parent.parent / "acceptance_artifacts"


def announce(capfd, index, name, ok, detail):
    with capfd.disabled():
        print(f"[acceptance] criterion {index} ({name}): "
              f"{'PASS' if ok else 'FAIL'} - {detail}")


def void_components(rho, threshold=0.5):
    """Connected void regions under periodic 4-connectivity."""
    labels, n = ndimage.label(np.asarray(rho) < threshold)
    if n == 0:
        return 0
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for edge in (zip(labels[0, :], labels[-1, :]),
                 zip(labels[:, 0], labels[:, -1])):
        for a, b in edge:
            if a and b and find(a) != find(b):
                parent[find(b)] = find(a)
    return len({find(l) for l in range(1, n + 1)})


def run_preset(name):
    config = get_preset(name)
    problem = config_to_problem(config)
    # measurements use the plain material law; the optimization problem's
    # density floor is a solver regularization, not part of the design
    plain = make_problem(problem.grid, problem.pair, problem.target,
                         problem.phase_field, problem.solver)
    rho0 = initial_phase(config.init_kind, problem.grid, seed=config.seed)
    report0, _ = evaluate(plain, rho0)
    rho, trace = minimize(problem, rho0, optimizer_settings(config))
    report, _ = evaluate(plain, rho)
    mu_eff, nu_eff, _ = effective_constants(plain.op, plain.pair, rho)
    ARTIFACTS.mkdir(exist_ok=True)
    write_density_pgm(ARTIFACTS / f"{name}_final.pgm", rho)
    write_density_pgm(ARTIFACTS / f"{name}_centered.pgm", center_void(rho))
    return {
        "config": config,
        "problem": problem,
        "rho": rho,
        "trace": trace,
        "f_stress0": report0.f_stress,
        "f_stress": report.f_stress,
        "mu_eff": float(mu_eff),
        "nu_eff": float(nu_eff),
    }


@pytest.fixture(scope="module")
def composite_run():
    return run_preset("square-sine-mu0.35")


@pytest.fixture(scope="module")
def auxetic_run():
    return run_preset("auxetic")


def test_criterion_1_projection_property_suite(capfd):
    rng = np.random.default_rng(20240815)
    worst_prop = 0.0
    for lattice in ("square", "hexagonal"):
        for nx, ny in [(4, 4), (5, 5), (31, 31)]:
            grid = make_grid(nx, ny, lattice)
            op = build_projection(grid)
            x = random_field(grid, rng)
            gx = apply(op, x)
            nx_norm = np.linalg.norm(x)
            worst_prop = max(
                worst_prop,
                np.linalg.norm(apply(op, gx) - gx) / np.linalg.norm(gx),
                np.max(np.abs(gx.mean(axis=(0, 1, 2)))) / nx_norm,
            )
            c = random_compatible(grid, rng)
            worst_prop = max(
                worst_prop, np.linalg.norm(apply(op, c) - c) / np.linalg.norm(c)
            )
            a, b = random_field(grid, rng), random_field(grid, rng)
            left, right = is_self_adjoint_check(op, a, b)
            worst_prop = max(worst_prop, abs(left - right) / max(abs(left), abs(right)))
    worst_dense = 0.0
    for lattice in ("square", "hexagonal"):
        for nx, ny in [(2, 2), (3, 3), (4, 4)]:
            grid = make_grid(nx, ny, lattice)
            op = build_projection(grid)
            dense = dense_projector(grid)
            x = random_field(grid, rng)
            ref = (dense @ x.reshape(-1)).reshape(x.shape)
            worst_dense = max(
                worst_dense,
                np.linalg.norm(apply(op, x) - ref) / np.linalg.norm(x),
            )
    ok = worst_prop <= 1e-12 and worst_dense <= 1e-10
    announce(capfd, 1, "projection operator properties", ok,
             f"worst property violation {worst_prop:.2e} (bar 1e-12), "
             f"worst dense-oracle mismatch {worst_dense:.2e} (bar 1e-10)")
    assert ok


def test_criterion_2_hexagonal_stencil_exactness(capfd):
    grid = make_grid(31, 31, "hexagonal", dx=1.0 / 31.0)
    stencils = build_stencils(grid)
    x, y = node_positions(grid)
    b, c = -1.3, 2.1
    g = element_gradient(stencils, 0.7 + b * x + c * y)
    interior = g[: grid.ny - 1, : grid.nx - 1]
    scale_aff = max(abs(b), abs(c)) / min(grid.dx, grid.dy)
    err_affine = max(
        float(np.max(np.abs(interior[..., 0] - b))),
        float(np.max(np.abs(interior[..., 1] - c))),
    ) / scale_aff
    rng = np.random.default_rng(20240815)
    f = rng.standard_normal(grid.shape)
    g = element_gradient(stencils, f)
    table = derivative_factor_table(stencils)
    via = np.fft.ifft2(table * np.fft.fft2(f)[:, :, None, None], axes=(0, 1))
    err_symbol = float(np.max(np.abs(via - g))) / float(np.max(np.abs(g)))
    ok = err_affine <= 10 * EPS and err_symbol <= 10 * EPS
    announce(capfd, 2, "hexagonal stencil exactness", ok,
             f"affine-field gradient error {err_affine / EPS:.2f} eps, "
             f"Fourier-symbol error {err_symbol / EPS:.2f} eps (bar 10 eps)")
    assert ok


def test_criterion_3_laminate_oracle(capfd):
    grid = make_grid(8, 8, "square")
    pair = MaterialPair.from_moduli()
    rho = np.ones(grid.shape)
    rho[:, 4:] = 0.5  # E = 1 | E = 0.5 vertical laminate, equal fractions
    op = build_projection(grid)
    cases = load_cases(0.01)
    series = mean_stress(solve(op, pair, rho, cases[0]))
    parallel = mean_stress(solve(op, pair, rho, cases[1]))
    err_series = abs(series[0, 0] - (2.0 / 3.0) * 0.01) / ((2.0 / 3.0) * 0.01)
    err_parallel = abs(parallel[1, 1] - 0.0075) / 0.0075
    ok = err_series <= 1e-8 and err_parallel <= 1e-8
    announce(capfd, 3, "two-phase laminate oracle", ok,
             f"series s11 rel err {err_series:.2e}, "
             f"parallel s22 rel err {err_parallel:.2e} (bar 1e-8)")
    assert ok


def test_criterion_4_sensitivity_error_slopes(capfd):
    drhos = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    details = []
    ok = True
    runs = [("square", 0.30, drhos, 0.2), ("square", 0.35, drhos, 0.2),
            ("hexagonal", 0.30, drhos[:4], 0.3)]
    for lattice, mu_t, steps, band in runs:
        grid = make_grid(15, 15, lattice, dx=1.0 / 15.0)
        problem = make_problem(
            grid,
            MaterialPair.from_moduli(),
            TargetSpec(mu_target=mu_t, deps=0.01),
            PhaseFieldParams(eta=grid.lx / 30.0, w=1e-4),
        )
        rng = np.random.default_rng(20240815)
        rho = rng.uniform(0.2, 0.8, size=grid.shape)
        _, sens, _ = evaluate_with_gradient(problem, rho)
        errors = np.array([
            np.linalg.norm(fd_sensitivity(problem, rho, d) - sens) for d in steps
        ])
        slope, used = decreasing_prefix_slope(steps, errors)
        ok = ok and used >= 3 and abs(slope - 1.0) <= band
        details.append(f"{lattice} mu_t={mu_t}: slope {slope:.3f} over {used} steps")
    announce(capfd, 4, "finite-difference validation slopes", ok,
             "; ".join(details) + " (bar 1.0 +/- 0.2, hexagonal qualitative)")
    assert ok


def test_criterion_5_composite_optimization(capfd, composite_run):
    run = composite_run
    ratio = run["f_stress"] / run["f_stress0"]
    mu_err = abs(run["mu_eff"] - 0.35) / 0.35
    inter = float(np.mean((run["rho"] > 0.05) & (run["rho"] < 0.95)))
    comps = void_components(run["rho"])
    bars = {
        "converged": run["trace"].converged,
        "stress ratio": ratio <= 1e-3,
        "mu within 1%": mu_err <= 0.01,
        "binary": inter < 0.15,
        "single void": comps == 1,
    }
    ok = all(bars.values())
    failed = ", ".join(k for k, v in bars.items() if not v) or "none"
    announce(capfd, 5, "composite optimization at full scale", ok,
             f"status={run['trace'].status}, f_stress/f0={ratio:.3e} (bar 1e-3), "
             f"mu_eff={run['mu_eff']:.5f} ({mu_err:.2%}, bar 1%), "
             f"intermediate={inter:.2%} (bar 15%), voids={comps}; "
             f"failed bars: {failed}")
    assert ok, f"failed bars: {failed}"


def test_criterion_6_auxetic_optimization(capfd, auxetic_run):
    run = auxetic_run
    mu_err = abs(run["mu_eff"] - 0.25) / 0.25
    bars = {
        "converged": run["trace"].converged,
        "nu negative": run["nu_eff"] < 0.0,
        "mu within 5%": mu_err <= 0.05,
    }
    ok = all(bars.values())
    failed = ", ".join(k for k, v in bars.items() if not v) or "none"
    announce(capfd, 6, "auxetic optimization", ok,
             f"status={run['trace'].status}, nu_eff={run['nu_eff']:+.4f} (bar < 0), "
             f"mu_eff={run['mu_eff']:.4f} ({mu_err:.1%}, bar 5%); "
             f"failed bars: {failed}")
    assert ok, f"failed bars: {failed}"


def test_criterion_7_adjoint_cost_parity(capfd, composite_run):
    _, _, stats = evaluate_with_gradient(
        composite_run["problem"], composite_run["rho"]
    )
    ratios = [a / e for a, e in zip(stats.adjoint_cg, stats.equilibrium_cg)]
    total = sum(stats.adjoint_cg) / sum(stats.equilibrium_cg)
    ok = all(r <= 2.0 for r in ratios)
    announce(capfd, 7, "adjoint solve cost parity", ok,
             f"per-case adjoint/equilibrium CG {['%.3f' % r for r in ratios]}, "
             f"total {total:.3f} (bar 2.0)")
    assert ok


def test_criterion_8_zero_stiffness_void(capfd):
    grid = make_grid(15, 15, "square", dx=1.0 / 15.0)
    pair = MaterialPair.from_moduli()
    x, y = node_positions(grid)
    inside = (x - 0.5) ** 2 + (y - 0.5) ** 2 <= 0.2**2
    rho = np.ones(grid.shape)
    rho[inside] = 0.0
    op = build_projection(grid)
    sol = solve(op, pair, rho, load_cases(0.01)[0], SolverSettings())
    peak = float(np.max(np.abs(sol.stress[inside])))
    bar = 1e-10 * 1.0 * 0.01
    ok = peak <= bar
    announce(capfd, 8, "zero-stiffness void robustness", ok,
             f"max |stress| inside the void {peak:.2e} (bar {bar:.0e})")
    assert ok
