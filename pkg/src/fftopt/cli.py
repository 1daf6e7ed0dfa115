"""Command-line interface.

Subcommands: ``solve`` (equilibrium for each configured load case),
``homogenize`` (effective constants), ``optimize`` (full density
optimization), ``validate-adjoint`` (finite-difference sweep against the
adjoint sensitivity).  Exit codes: 0 success, 1 usage or configuration error,
2 solver failure, 3 optimizer non-convergence (artifacts still written).

Outputs land in the --out directory and are byte-identical across runs with
the same configuration; pass --threads 1 to also pin any BLAS pools.
"""

import argparse
import os
import sys
from dataclasses import asdict

import numpy as np

from . import adjoint, equilibrium, io, kernels, objective, optimize
from .errors import ConfigurationError, ConvergenceError, NumericalConsistencyError
from .presets import get_preset, preset_names


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for
    solver failures, so remap usage problems to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sub):
    sub.add_argument("--config", metavar="PATH", help="INI run configuration")
    sub.add_argument(
        "--preset",
        metavar="NAME",
        help=f"bundled configuration, one of: {', '.join(preset_names())}",
    )
    sub.add_argument("--out", metavar="DIR", help="output directory (default from config)")
    sub.add_argument(
        "--threads",
        type=int,
        metavar="N",
        help="cap BLAS/OpenMP thread pools; 1 guarantees bitwise determinism",
    )


def build_parser():
    parser = _Parser(prog="fftopt", description=__doc__.split("\n")[0])
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_solve = commands.add_parser(
        "solve", help="equilibrium solve of each configured load case"
    )
    _add_common(p_solve)
    p_solve.add_argument("--density", metavar="PATH", required=True,
                         help="density text file, ny rows x nx columns")
    p_solve.add_argument("--dump-fields", action="store_true",
                         help="also write per-case strain/stress arrays (.npy)")
    p_solve.set_defaults(func=cmd_solve)

    p_homog = commands.add_parser("homogenize", help="effective elastic constants")
    _add_common(p_homog)
    p_homog.add_argument("--density", metavar="PATH", required=True)
    p_homog.set_defaults(func=cmd_homogenize)

    p_opt = commands.add_parser("optimize", help="density optimization run")
    _add_common(p_opt)
    p_opt.add_argument("--density", metavar="PATH",
                       help="starting density (default: configured initial phase)")
    p_opt.set_defaults(func=cmd_optimize)

    p_val = commands.add_parser(
        "validate-adjoint",
        help="finite-difference sweep vs the adjoint sensitivity "
        "(re-solves per pixel; intended for small grids)",
    )
    _add_common(p_val)
    p_val.add_argument("--drho", metavar="LIST", default="1e-2,1e-3,1e-4,1e-5,1e-6",
                       help="comma-separated decreasing step sizes")
    p_val.add_argument("--fd-scheme", choices=("forward", "central"), default="forward")
    p_val.set_defaults(func=cmd_validate_adjoint)
    return parser


def _cap_threads(n):
    if n is None:
        return
    if n < 1:
        raise ConfigurationError(f"--threads must be >= 1, got {n}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(n)


def _resolve_config(args):
    if args.config and args.preset:
        raise ConfigurationError("pass either --config or --preset, not both")
    if args.config:
        config = io.load_config(args.config)
    elif args.preset:
        config = get_preset(args.preset)
    else:
        config = io.RunConfig()
    return config


def _prepare(args):
    _cap_threads(args.threads)
    config = _resolve_config(args)
    out_dir = args.out or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    io.save_config(os.path.join(out_dir, "config.ini"), config)
    problem = io.config_to_problem(config)
    return config, problem, out_dir


def _load_density(args, problem):
    return io.read_density_text(args.density, problem.grid)


def _sym_list(t):
    return io.jsonable(np.asarray(t))


def cmd_solve(args):
    config, problem, out_dir = _prepare(args)
    rho = _load_density(args, problem)
    cases_payload = []
    for k, case in enumerate(problem.target.cases):
        sol = equilibrium.solve(problem.op, problem.pair, rho, case, problem.solver)
        cases_payload.append({
            "case": k,
            "mean_strain": _sym_list(case.mean_strain),
            "mean_stress": _sym_list(equilibrium.mean_stress(sol)),
            "newton_iterations": sol.stats.newton_iterations,
            "cg_iterations": sol.stats.cg_iterations,
            "newton_residuals": io.jsonable(sol.stats.newton_residuals),
        })
        if args.dump_fields:
            np.save(os.path.join(out_dir, f"case{k}_strain.npy"), sol.strain)
            np.save(os.path.join(out_dir, f"case{k}_stress.npy"), sol.stress)
    io.write_json(os.path.join(out_dir, "solve_summary.json"), {
        "backend": kernels.BACKEND,
        "cases": cases_payload,
    })
    return 0


def cmd_homogenize(args):
    config, problem, out_dir = _prepare(args)
    rho = _load_density(args, problem)
    mu_eff, nu_eff, c_eff = equilibrium.effective_constants(
        problem.op, problem.pair, rho, config.deps, problem.solver
    )
    io.write_json(os.path.join(out_dir, "homogenize_summary.json"), {
        "backend": kernels.BACKEND,
        "mu_eff": float(mu_eff),
        "nu_eff": float(nu_eff),
        "c_eff": io.jsonable(c_eff),
        "deps": config.deps,
    })
    return 0


def cmd_optimize(args):
    config, problem, out_dir = _prepare(args)
    if args.density:
        rho0 = _load_density(args, problem)
    else:
        rho0 = optimize.initial_phase(config.init_kind, problem.grid, config.seed)
    settings = io.optimizer_settings(config)
    report0, _ = objective.evaluate(problem, rho0)
    rho_star, trace = optimize.minimize(problem, rho0, settings)
    report, _ = objective.evaluate(problem, rho_star)
    mu_eff, nu_eff, c_eff = equilibrium.effective_constants(
        problem.op, problem.pair, rho_star, config.deps, problem.solver
    )
    centered = optimize.center_void(rho_star)
    io.write_density_text(os.path.join(out_dir, "density_final.txt"), rho_star)
    io.write_density_pgm(os.path.join(out_dir, "density_final.pgm"), rho_star)
    io.write_density_text(os.path.join(out_dir, "density_centered.txt"), centered)
    io.write_density_pgm(os.path.join(out_dir, "density_centered.pgm"), centered)
    io.write_trace_csv(os.path.join(out_dir, "trace.csv"), trace)
    io.write_json(os.path.join(out_dir, "optimize_summary.json"), {
        "backend": kernels.BACKEND,
        "config": io.jsonable(asdict(config)),
        "initial": {
            "f_total": report0.f_total,
            "f_stress": report0.f_stress,
            "f_interface": report0.f_interface,
        },
        "final": {
            "f_total": report.f_total,
            "f_stress": report.f_stress,
            "f_interface": report.f_interface,
            "mean_stresses": [_sym_list(m) for m in report.mean_stresses],
            "target_stresses": [_sym_list(t) for t in report.target_stresses],
        },
        "effective": {
            "mu_eff": float(mu_eff),
            "nu_eff": float(nu_eff),
            "c_eff": io.jsonable(c_eff),
        },
        "optimizer": {
            "status": trace.status,
            "message": trace.message,
            "iterations": len(trace.records),
            "evaluations": trace.n_evaluations,
        },
    })
    print(f"status={trace.status} iterations={len(trace.records)} "
          f"f_total={report.f_total!r} mu_eff={mu_eff!r} nu_eff={nu_eff!r}")
    return 0 if trace.converged else 3


def decreasing_prefix_slope(drhos, errors, min_points=3):
    """Log-log slope fitted over the leading strictly-decreasing error run.

    Points past the first error increase belong to the roundoff floor and are
    excluded.  Returns (slope, n_points_used); slope is nan when fewer than
    ``min_points`` pre-floor points exist.
    """
    n = 1
    while n < len(errors) and errors[n] < errors[n - 1]:
        n += 1
    if n < min_points:
        return float("nan"), n
    slope = np.polyfit(np.log10(drhos[:n]), np.log10(errors[:n]), 1)[0]
    return float(slope), n


def cmd_validate_adjoint(args):
    config, problem, out_dir = _prepare(args)
    try:
        drhos = [float(tok) for tok in args.drho.replace(",", " ").split()]
    except ValueError as err:
        raise ConfigurationError(f"bad --drho list: {args.drho!r}") from err
    if not drhos or any(d <= 0 for d in drhos) or any(
        a <= b for a, b in zip(drhos, drhos[1:])
    ):
        raise ConfigurationError("--drho must be a decreasing list of positive steps")
    rho = optimize.initial_phase(config.init_kind, problem.grid, config.seed)
    _, sens, _ = adjoint.evaluate_with_gradient(problem, rho)
    errors = []
    for drho in drhos:
        fd = adjoint.fd_sensitivity(problem, rho, drho, scheme=args.fd_scheme)
        errors.append(float(np.linalg.norm(fd - sens)))
    with open(os.path.join(out_dir, "validate_adjoint.csv"), "w",
              encoding="ascii", newline="\n") as handle:
        handle.write("drho,error\n")
        for drho, err in zip(drhos, errors):
            handle.write(f"{drho!r},{err!r}\n")
    slope, used = decreasing_prefix_slope(np.asarray(drhos), np.asarray(errors))
    io.write_json(os.path.join(out_dir, "validate_adjoint_summary.json"), {
        "backend": kernels.BACKEND,
        "scheme": args.fd_scheme,
        "drho": drhos,
        "error": errors,
        "slope": slope,
        "points_fitted": used,
    })
    print(f"slope={slope!r} over {used} of {len(drhos)} steps ({args.fd_scheme})")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"fftopt: configuration error: {err}", file=sys.stderr)
        return 1
    except (ConvergenceError, NumericalConsistencyError) as err:
        print(f"fftopt: solver failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
