"""Periodic equilibrium under an imposed mean strain.

The unknown strain field is split as eps = mean + fluctuation, with the
fluctuation constrained to the compatible subspace.  Equilibrium requires the
projected stress to vanish; a Newton step solves the projected linear system

    G : C : d(eps) = -G : sigma(eps)

by conjugate gradients with the matrix-free operator x -> G:(C:x).  The
operator is self-adjoint positive semi-definite on the compatible subspace
(projector sandwich of a pointwise semi-definite law), so plain CG applies;
with exact voids it is singular, but for consistent right-hand sides CG still
converges in the residual seminorm.  Starting from x = 0 every iterate stays
compatible and zero-mean.

For linear elasticity the residual after one Newton update is at roundoff
level, so solves converge in a single Newton step (plus the verification
residual evaluation).
"""

from dataclasses import dataclass, field

import numpy as np

from . import projection
from .errors import ConvergenceError
from .material import stress_field
from .tensors import SQRT2, uniform_field, vec_to_sym

# minimum number of iterations without a new best residual before CG declares
# stagnation; the effective window grows with the problem because the residual
# norm is not monotone and exact-arithmetic CG may need up to rank(G C) steps
STAGNATION_WINDOW = 50

# stagnated CG counts as converged if it reached this multiple of the tolerance
STAGNATION_SLACK = 10.0

# recompute the residual from the definition this often: over long
# ill-conditioned runs the recurrence residual drifts away from b - A x and
# both the convergence test and the search directions become unreliable
RESIDUAL_REPLACEMENT_PERIOD = 50


def stagnation_window(grid):
    """Iterations without improvement tolerated before CG gives up."""
    return max(STAGNATION_WINDOW, 2 * grid.nx * grid.ny)


@dataclass(frozen=True)
class LoadCase:
    """Imposed mean strain, a symmetric 2x2 tensor."""

    mean_strain: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.mean_strain, dtype=float)
        if eps.shape != (2, 2) or not np.allclose(eps, eps.T, atol=0.0):
            raise ValueError(f"mean strain must be symmetric 2x2, got\n{eps}")
        if not np.all(np.isfinite(eps)):
            raise ValueError("mean strain must be finite")
        object.__setattr__(self, "mean_strain", eps)


def load_cases(deps):
    """The three independent mean-strain cases of amplitude ``deps``.

    Case 0 is uniaxial along x, case 1 uniaxial along y, case 2 pure shear
    with off-diagonal entries deps/2.
    """
    return (
        LoadCase(np.array([[deps, 0.0], [0.0, 0.0]])),
        LoadCase(np.array([[0.0, 0.0], [0.0, deps]])),
        LoadCase(np.array([[0.0, deps / 2.0], [deps / 2.0, 0.0]])),
    )


@dataclass(frozen=True)
class SolverSettings:
    newton_tol: float = 1e-8
    cg_tol: float = 1e-10
    max_newton: int = 10
    max_cg: int | None = None  # None: 10x the displacement unknown count

    def __post_init__(self):
        if not (0.0 < self.newton_tol < 1.0 and 0.0 < self.cg_tol < 1.0):
            raise ValueError("tolerances must lie in (0, 1)")
        if self.max_newton < 1 or (self.max_cg is not None and self.max_cg < 1):
            raise ValueError("iteration limits must be >= 1")

    def cg_limit(self, grid):
        if self.max_cg is not None:
            return self.max_cg
        return 10 * 2 * grid.nx * grid.ny


@dataclass
class CgStats:
    iterations: int = 0
    residuals: list = field(default_factory=list)  # relative residual history
    stagnated: bool = False


@dataclass
class SolveStats:
    newton_iterations: int = 0
    cg_iterations: int = 0
    newton_residuals: list = field(default_factory=list)
    cg_runs: list = field(default_factory=list)


@dataclass(frozen=True)
class EquilibriumSolution:
    strain: np.ndarray  # (ny, nx, 2, 3)
    stress: np.ndarray  # (ny, nx, 2, 3)
    load: LoadCase
    stats: SolveStats


def residual(op, pair, rho, strain):
    """Projected stress G:sigma(eps), the equilibrium residual field."""
    return projection.apply(op, stress_field(pair, rho, strain))


def compatible_solve(op, pair, rho, b, settings, max_iter=None):
    """CG for (G C) x = b on the compatible subspace; b must be compatible.

    Returns ``(x, CgStats)``.  Relative residuals are measured against ‖b‖.
    Raises :class:`ConvergenceError` when the iteration budget is exhausted or
    the residual stagnates far from tolerance.
    """
    if max_iter is None:
        max_iter = settings.cg_limit(op.grid)
    stats = CgStats()
    x = np.zeros_like(b)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return x, stats
    r = b.copy()
    p = r.copy()
    rs = b_norm**2
    # best relative residual so far; the first iterate always sets it
    best = np.inf
    since_best = 0
    window = stagnation_window(op.grid)
    for _ in range(max_iter):
        ap = projection.apply(op, stress_field(pair, rho, p))
        pap = float(np.vdot(p, ap).real)
        if not np.isfinite(pap) or pap <= 0.0:
            # numerically null direction: accept if already close enough
            rel = np.sqrt(rs) / b_norm
            if rel <= STAGNATION_SLACK * settings.cg_tol:
                stats.stagnated = True
                return x, stats
            raise ConvergenceError(
                f"CG hit a non-positive curvature direction at relative "
                f"residual {rel:.3e}",
                residuals=stats.residuals,
            )
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        stats.iterations += 1
        if stats.iterations % RESIDUAL_REPLACEMENT_PERIOD == 0:
            r = b - projection.apply(op, stress_field(pair, rho, x))
        rs_new = float(np.vdot(r, r).real)
        rel = np.sqrt(rs_new) / b_norm
        stats.residuals.append(rel)
        if rel <= settings.cg_tol:
            return x, stats
        if rel < best:
            best = rel
            since_best = 0
        else:
            since_best += 1
            if since_best >= window:
                if rel <= STAGNATION_SLACK * settings.cg_tol:
                    stats.stagnated = True
                    return x, stats
                raise ConvergenceError(
                    f"CG stagnated at relative residual {rel:.3e} "
                    f"after {stats.iterations} iterations",
                    residuals=stats.residuals,
                )
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise ConvergenceError(
        f"CG exceeded {max_iter} iterations "
        f"(relative residual {stats.residuals[-1]:.3e})",
        residuals=stats.residuals,
    )


def solve(op, pair, rho, load, settings=None):
    """Newton-CG equilibrium solve for one load case."""
    if settings is None:
        settings = SolverSettings()
    grid = op.grid
    strain = uniform_field(grid, load.mean_strain)
    # homogeneous-stress scale; keeps the convergence measure meaningful
    # even when the current stress tends to zero (pure void)
    ref0 = float(np.linalg.norm(stress_field(pair, rho, strain)))
    stats = SolveStats()
    for it in range(settings.max_newton + 1):
        sigma = stress_field(pair, rho, strain)
        res = projection.apply(op, sigma)
        res_norm = float(np.linalg.norm(res))
        ref = max(float(np.linalg.norm(sigma)), ref0)
        rel = res_norm / ref if ref > 0.0 else (0.0 if res_norm == 0.0 else np.inf)
        stats.newton_residuals.append(rel)
        if not np.isfinite(rel):
            raise ConvergenceError(
                "non-finite equilibrium residual", residuals=stats.newton_residuals
            )
        if rel <= settings.newton_tol:
            return EquilibriumSolution(strain=strain, stress=sigma, load=load, stats=stats)
        if it == settings.max_newton:
            break
        deps, cg_stats = compatible_solve(op, pair, rho, -res, settings)
        stats.newton_iterations += 1
        stats.cg_iterations += cg_stats.iterations
        stats.cg_runs.append(cg_stats)
        strain = strain + deps
    raise ConvergenceError(
        f"equilibrium did not reach tolerance {settings.newton_tol:.1e} in "
        f"{settings.max_newton} Newton iterations "
        f"(relative residual {stats.newton_residuals[-1]:.3e})",
        residuals=stats.newton_residuals,
    )


def field_mean(values):
    """Area-weighted mean of a quadrature field; equal areas, plain average."""
    return np.asarray(values, dtype=float).mean(axis=(0, 1, 2))


def mean_stress(sol):
    """Homogenized stress of a solution, symmetric 2x2."""
    return vec_to_sym(field_mean(sol.stress))


def effective_constants(op, pair, rho, deps=0.01, settings=None):
    """Effective shear modulus, Poisson ratio and 3x3 stiffness matrix.

    Solves the three load cases; the stiffness columns are the mean-stress
    responses divided by the strain amplitude of the case, expressed in the
    orthonormal basis (the shear case carries the sqrt(2) component factor).
    mu_eff is read off the shear case, nu_eff from the transverse/axial
    stress ratio of the uniaxial-x case.
    """
    if deps <= 0.0:
        raise ValueError(f"strain amplitude must be positive, got {deps}")
    sols = [solve(op, pair, rho, case, settings) for case in load_cases(deps)]
    means = [field_mean(s.stress) for s in sols]
    c_eff = np.column_stack(
        [means[0] / deps, means[1] / deps, SQRT2 * means[2] / deps]
    )
    mu_eff = means[2][2] / (SQRT2 * deps)
    nu_eff = means[0][1] / means[0][0] if means[0][0] != 0.0 else float("nan")
    return mu_eff, nu_eff, c_eff
