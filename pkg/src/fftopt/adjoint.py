"""Exact design sensitivities by the discrete adjoint method.

For each load case the objective depends on the strain field only through the
homogenized stress, so its strain partial is a uniform-per-pixel field

    df/deps_(p,e) = (2 A_e / V) * C(rho_p) : (mean_stress - target_stress)

and the adjoint field solves the same projected linear system as one
equilibrium Newton step,

    G : C : Lambda = -G : df/deps,

reusing the equilibrium CG verbatim.  The total derivative w.r.t. the pixel
density then assembles pointwise: an explicit stress-matching term (the
objective's direct rho-dependence through C(rho) at fixed strain), the
adjoint pairing with d(sigma)/d(rho), and the phase-field derivative.  The
pairing with Lambda carries no extra area factor: the quadrature weight
already sits inside df/deps, and with x = 0 initial guesses all fields live
in the same plainly-weighted compatible subspace.
"""

from dataclasses import dataclass, field

import numpy as np

from . import objective, projection
from .equilibrium import compatible_solve
from .errors import ConvergenceError
from .material import dstress_drho_field, stress_field
from .objective import interface_gradient


def df_dstrain(problem, rho_mat, mismatch):
    """Strain partial of the stress objective for one case, a quadrature field.

    ``rho_mat`` is the material-law density (already floored if the problem
    uses a floor); ``mismatch`` is the orthonormal component vector of
    (mean - target) stress of the case.
    """
    grid = problem.grid
    direction = np.broadcast_to(
        np.asarray(mismatch, dtype=float), (grid.ny, grid.nx, 2, 3)
    )
    cfield = stress_field(problem.pair, rho_mat, np.ascontiguousarray(direction))
    return (2.0 * grid.element_area / grid.volume) * cfield


def solve_adjoint(problem, rho_mat, rhs):
    """Adjoint field of one case: CG-solve G:C:Lambda = -G:rhs.

    Returns ``(Lambda, CgStats)``; Lambda is compatible and zero-mean by
    construction (projected right-hand side, zero initial guess).
    """
    b = -projection.apply(problem.op, rhs)
    return compatible_solve(problem.op, problem.pair, rho_mat, b, problem.solver)


def assemble_sensitivity(problem, rho, solutions, lambdas, report):
    """Pointwise assembly of the total density derivative, one value per pixel."""
    if not len(solutions) == len(lambdas) == len(report.mean_stresses):
        raise ValueError("solutions, adjoints and report cases must align")
    grid = problem.grid
    sens = interface_gradient(rho, grid, problem.stencils, problem.phase_field)
    rho_mat = objective.stiffness_density(problem, rho)
    # chain factor of the affine design-to-material map
    chain = 1.0 - problem.rho_floor
    scale = 2.0 * grid.element_area / grid.volume
    for sol, lam, mis in zip(solutions, lambdas, report.case_mismatches()):
        dsig = chain * dstress_drho_field(problem.pair, rho_mat, sol.strain)
        sens += scale * np.einsum("ijec,c->ij", dsig, mis)
        sens += np.einsum("ijec,ijec->ij", dsig, lam)
    return sens


@dataclass
class GradientStats:
    """Iteration bookkeeping of one objective-plus-gradient evaluation."""

    equilibrium_cg: list = field(default_factory=list)  # per case
    adjoint_cg: list = field(default_factory=list)  # per case


def evaluate_with_gradient(problem, rho):
    """Objective report, sensitivity field and solver statistics at ``rho``."""
    report, solutions = objective.evaluate(problem, rho)
    stats = GradientStats(
        equilibrium_cg=[sol.stats.cg_iterations for sol in solutions]
    )
    rho_mat = objective.stiffness_density(problem, rho)
    lambdas = []
    for mis in report.case_mismatches():
        rhs = df_dstrain(problem, rho_mat, mis)
        lam, cg = solve_adjoint(problem, rho_mat, rhs)
        lambdas.append(lam)
        stats.adjoint_cg.append(cg.iterations)
    sens = assemble_sensitivity(problem, rho, solutions, lambdas, report)
    return report, sens, stats


def _objective_at(problem, rho, j, i, value):
    pert = np.array(rho, dtype=float)
    pert[j, i] = value
    try:
        report, _ = objective.evaluate(problem, pert)
    except ConvergenceError as err:
        raise ConvergenceError(
            f"equilibrium failed during finite differencing at pixel "
            f"(j={j}, i={i}), rho={value}: {err}",
            residuals=err.residuals,
        ) from err
    return report.f_total


def fd_sensitivity_at(problem, rho, pixels, drho, f0=None):
    """Forward/backward difference of the objective at selected ``(j, i)`` pixels."""
    rho = np.asarray(rho, dtype=float)
    if f0 is None:
        base, _ = objective.evaluate(problem, rho)
        f0 = base.f_total
    values = []
    for j, i in pixels:
        r = rho[j, i]
        if r + drho <= 1.0:
            values.append((_objective_at(problem, rho, j, i, r + drho) - f0) / drho)
        else:
            values.append((f0 - _objective_at(problem, rho, j, i, r - drho)) / drho)
    return np.asarray(values)


def fd_sensitivity(problem, rho, drho, scheme="forward"):
    """Finite-difference sensitivity, one full re-solve per perturbed pixel.

    ``scheme`` is "forward" or "central"; pixels whose perturbation would
    leave [0, 1] fall back to the one-sided difference that stays inside.
    Every perturbed objective is solved from scratch, so the result is
    independent of evaluation order.
    """
    if drho <= 0.0:
        raise ValueError(f"finite-difference step must be positive, got {drho}")
    if scheme not in ("forward", "central"):
        raise ValueError(f"unknown scheme {scheme!r}")
    rho = np.asarray(rho, dtype=float)
    grid = problem.grid
    base, _ = objective.evaluate(problem, rho)
    f0 = base.f_total
    out = np.empty(grid.shape, dtype=float)
    for j in range(grid.ny):
        for i in range(grid.nx):
            r = rho[j, i]
            up_ok = r + drho <= 1.0
            down_ok = r - drho >= 0.0
            if scheme == "central" and up_ok and down_ok:
                f_up = _objective_at(problem, rho, j, i, r + drho)
                f_dn = _objective_at(problem, rho, j, i, r - drho)
                out[j, i] = (f_up - f_dn) / (2.0 * drho)
            elif up_ok:
                f_up = _objective_at(problem, rho, j, i, r + drho)
                out[j, i] = (f_up - f0) / drho
            elif down_ok:
                f_dn = _objective_at(problem, rho, j, i, r - drho)
                out[j, i] = (f0 - f_dn) / drho
            else:
                raise ValueError(
                    f"step {drho} does not fit inside [0, 1] at pixel "
                    f"(j={j}, i={i}) with rho={r}"
                )
    return out
