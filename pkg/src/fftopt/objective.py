"""Aim function: homogenized-stress matching plus a phase-field penalty.

The stress term sums, over the prescribed load cases, the squared Frobenius
norm of the difference between the homogenized stress and the stress a
hypothetical homogeneous target material would produce under the same mean
strain.  The interface term is the double-well phase-field functional

    w * ( sum_(pixel,e) A_e * eta * |grad rho|^2
          + sum_pixel A_pix * (1/eta) * rho^2 (1-rho)^2 )

with the gradient evaluated per element by the discrete stencils and the well
lumped at the nodes.  Both the value and its analytic density derivative are
provided; they are consistent by construction (differentiate the discrete
expression, not the continuum one).
"""

from dataclasses import dataclass, field

import numpy as np

from . import equilibrium
from .grid import build_stencils, element_gradient, element_gradient_adjoint
from .projection import build_projection
from .tensors import sym_to_vec


@dataclass(frozen=True)
class TargetSpec:
    """Target modulus/Poisson pair and the load cases that probe it."""

    mu_target: float
    nu_target: float = 0.0
    deps: float = 0.01
    cases: tuple = ()

    def __post_init__(self):
        if self.deps <= 0.0:
            raise ValueError(f"strain amplitude must be positive, got {self.deps}")
        cases = tuple(self.cases) or equilibrium.load_cases(self.deps)
        if not 1 <= len(cases) <= 3:
            raise ValueError(f"need 1..3 load cases, got {len(cases)}")
        object.__setattr__(self, "cases", cases)

    @property
    def lam_target(self):
        return 2.0 * self.mu_target * self.nu_target / (1.0 - self.nu_target)


def target_stress(target, case):
    """Stress of the homogeneous target material under the case's mean strain."""
    eps = case.mean_strain
    lam_t = target.lam_target
    return lam_t * np.trace(eps) * np.eye(2) + 2.0 * target.mu_target * eps


@dataclass(frozen=True)
class PhaseFieldParams:
    """Interface-penalty weights: width parameter eta, overall weight w."""

    eta: float
    w: float

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError(f"interface width must be positive, got {self.eta}")
        if self.w < 0.0:
            raise ValueError(f"interface weight must be nonnegative, got {self.w}")


def interface_energy(rho, grid, stencils, pf):
    """Value of the weighted phase-field functional for a nodal density."""
    rho = np.asarray(rho, dtype=float)
    g = element_gradient(stencils, rho)  # (ny, nx, 2, 2)
    grad_term = grid.element_area * pf.eta * float(np.vdot(g, g))
    well = rho * rho * (1.0 - rho) ** 2
    well_term = grid.cell_area / pf.eta * float(well.sum())
    return pf.w * (grad_term + well_term)


def interface_gradient(rho, grid, stencils, pf):
    """Derivative of :func:`interface_energy` w.r.t. each nodal density."""
    rho = np.asarray(rho, dtype=float)
    g = element_gradient(stencils, rho)
    grad_part = 2.0 * grid.element_area * pf.eta * element_gradient_adjoint(stencils, g)
    well_part = grid.cell_area / pf.eta * 2.0 * rho * (1.0 - rho) * (1.0 - 2.0 * rho)
    return pf.w * (grad_part + well_part)


@dataclass(frozen=True)
class ObjectiveReport:
    f_total: float
    f_stress: float
    f_interface: float
    mean_stresses: tuple  # per case, symmetric 2x2
    target_stresses: tuple

    def case_mismatches(self):
        """Mandel component vectors of (mean - target) stress per case."""
        return tuple(
            sym_to_vec(m) - sym_to_vec(t)
            for m, t in zip(self.mean_stresses, self.target_stresses)
        )


def aim_function(rho, solutions, target, pf, grid, stencils):
    """Assemble the objective report from solved load cases."""
    if len(solutions) != len(target.cases):
        raise ValueError(
            f"{len(solutions)} solutions for {len(target.cases)} load cases"
        )
    means = []
    targets = []
    f_stress = 0.0
    for sol, case in zip(solutions, target.cases):
        mean = equilibrium.mean_stress(sol)
        goal = target_stress(target, case)
        # Frobenius norm of the tensor difference = 2-norm of the
        # orthonormal component difference
        f_stress += float(np.sum((sym_to_vec(mean) - sym_to_vec(goal)) ** 2))
        means.append(mean)
        targets.append(goal)
    f_interface = interface_energy(rho, grid, stencils, pf)
    return ObjectiveReport(
        f_total=f_stress + f_interface,
        f_stress=f_stress,
        f_interface=f_interface,
        mean_stresses=tuple(means),
        target_stresses=tuple(targets),
    )


@dataclass(frozen=True)
class OptimizationProblem:
    """Everything fixed during an optimization: geometry, operator, physics.

    ``rho_floor`` maps the design density affinely onto [rho_floor, 1] before
    the material law is applied.  With exact zero-stiffness pixels the strain
    inside a void is only determined up to fields that carry no stress, so
    the density derivative of the stress term is ill-defined there; a small
    floor keeps every pixel's strain (and hence the sensitivity) unique.  The
    interface term always sees the raw design density.
    """

    grid: object
    stencils: object = field(repr=False)
    op: object = field(repr=False)
    pair: object
    target: TargetSpec
    phase_field: PhaseFieldParams
    solver: equilibrium.SolverSettings
    rho_floor: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rho_floor < 1.0:
            raise ValueError(f"density floor must lie in [0, 1), got {self.rho_floor}")


def stiffness_density(problem, rho):
    """Density seen by the material law: raw, or floored away from zero."""
    rho = np.asarray(rho, dtype=float)
    d = problem.rho_floor
    if d == 0.0:
        return rho
    return d + (1.0 - d) * rho


def make_problem(grid, pair, target, phase_field, solver=None, rho_floor=0.0):
    """Build the stencils and projector once and bundle the problem."""
    stencils = build_stencils(grid)
    op = build_projection(grid, stencils)
    if solver is None:
        solver = equilibrium.SolverSettings()
    return OptimizationProblem(
        grid=grid,
        stencils=stencils,
        op=op,
        pair=pair,
        target=target,
        phase_field=phase_field,
        solver=solver,
        rho_floor=rho_floor,
    )


def solve_cases(problem, rho):
    """Equilibrium solutions for every load case of the problem's target."""
    rho_mat = stiffness_density(problem, rho)
    return tuple(
        equilibrium.solve(problem.op, problem.pair, rho_mat, case, problem.solver)
        for case in problem.target.cases
    )


def evaluate(problem, rho):
    """Solve all cases and report the objective decomposition."""
    solutions = solve_cases(problem, rho)
    report = aim_function(
        rho, solutions, problem.target, problem.phase_field, problem.grid, problem.stencils
    )
    return report, solutions
