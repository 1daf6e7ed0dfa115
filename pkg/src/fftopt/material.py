"""Isotropic 2D linear elasticity with density-interpolated stiffness.

The law is genuinely two-dimensional: E = 4*mu*(lam+mu)/(lam+2*mu) and
nu = lam/(lam+2*mu), inverted as mu = E/(2(1+nu)), lam = E*nu/(1-nu**2).
With nu = 0 these coincide with both plane stress and plane strain.

A two-phase material interpolates the engineering properties linearly,
E(rho) = E0 + rho*(E1-E0) and likewise nu(rho), then converts to Lame
parameters.  rho = 0 with a zero-stiffness phase is an exact void: stresses
vanish identically, no weak-material surrogate is involved.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError
from .tensors import sym_to_vec, vec_to_sym


@dataclass(frozen=True)
class IsotropicElastic2D:
    """Lame parameters of one phase; admissible when C is positive semi-definite."""

    lam: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu", float(self.mu))
        if self.mu < 0.0 or self.lam + self.mu < 0.0:
            raise ConfigurationError(
                f"indefinite stiffness: lam={self.lam}, mu={self.mu} "
                "(needs mu >= 0 and lam + mu >= 0)"
            )

    @property
    def E(self):
        denom = self.lam + 2.0 * self.mu
        if denom == 0.0:
            return 0.0  # admissible only for the zero material
        return 4.0 * self.mu * (self.lam + self.mu) / denom

    @property
    def nu(self):
        denom = self.lam + 2.0 * self.mu
        if denom == 0.0:
            return 0.0
        return self.lam / denom


def lame_from_E_nu(E, nu):
    """Invert the 2D relations; exact round trip with the properties above."""
    if not -1.0 < nu < 1.0:
        raise ConfigurationError(f"Poisson ratio must lie in (-1, 1), got {nu}")
    if E < 0.0:
        raise ConfigurationError(f"Young's modulus must be nonnegative, got {E}")
    mu = E / (2.0 * (1.0 + nu))
    lam = E * nu / (1.0 - nu * nu)
    return IsotropicElastic2D(lam=lam, mu=mu)


@dataclass(frozen=True)
class MaterialPair:
    """Void-ish phase0 at rho=0, solid phase1 at rho=1, linear in (E, nu)."""

    phase0: IsotropicElastic2D
    phase1: IsotropicElastic2D

    @classmethod
    def from_moduli(cls, E0=0.0, nu0=0.0, E1=1.0, nu1=0.0):
        return cls(phase0=lame_from_E_nu(E0, nu0), phase1=lame_from_E_nu(E1, nu1))

    def moduli(self, rho):
        """Lame parameters at density rho (scalar or array), same shape out."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < -1e-12) or np.any(rho > 1.0 + 1e-12):
            raise ConfigurationError("density outside [0, 1]")
        e = self.phase0.E + rho * (self.phase1.E - self.phase0.E)
        nu = self.phase0.nu + rho * (self.phase1.nu - self.phase0.nu)
        mu = e / (2.0 * (1.0 + nu))
        lam = e * nu / (1.0 - nu * nu)
        return lam, mu

    def dmoduli(self, rho):
        """d(lam)/d(rho), d(mu)/d(rho) at rho; constants when nu0 == nu1."""
        rho = np.asarray(rho, dtype=float)
        de = self.phase1.E - self.phase0.E
        dnu = self.phase1.nu - self.phase0.nu
        e = self.phase0.E + rho * de
        nu = self.phase0.nu + rho * dnu
        one_m = 1.0 - nu * nu
        dmu = de / (2.0 * (1.0 + nu)) - e * dnu / (2.0 * (1.0 + nu) ** 2)
        dlam = de * nu / one_m + e * dnu * (1.0 + nu * nu) / one_m**2
        return dlam, dmu


def tangent(pair, rho):
    """Stiffness matrix (3x3) in the orthonormal basis at density rho."""
    lam, mu = pair.moduli(rho)
    return np.array(
        [
            [lam + 2.0 * mu, lam, 0.0],
            [lam, lam + 2.0 * mu, 0.0],
            [0.0, 0.0, 2.0 * mu],
        ]
    )


def stress(pair, rho, eps):
    """Hooke stress of one symmetric 2x2 strain at density rho."""
    lam, mu = pair.moduli(rho)
    eps = np.asarray(eps, dtype=float)
    return vec_to_sym(kernels.isotropic_apply(lam, mu, sym_to_vec(eps)))


def dstress_drho(pair, rho, eps):
    """Density derivative of the stress at fixed strain, symmetric 2x2."""
    dlam, dmu = pair.dmoduli(rho)
    eps = np.asarray(eps, dtype=float)
    return vec_to_sym(kernels.isotropic_apply(dlam, dmu, sym_to_vec(eps)))


def _per_element(coef):
    """Insert the element axis so per-pixel arrays broadcast over fields."""
    coef = np.asarray(coef, dtype=float)
    return coef[..., None] if coef.ndim else coef


def stress_field(pair, rho, strain, out=None):
    """Pointwise stress of a quadrature strain field ``(ny, nx, 2, 3)``.

    ``rho`` is per pixel ``(ny, nx)``; both elements of a pixel share it.
    """
    lam, mu = pair.moduli(rho)
    return kernels.isotropic_apply(_per_element(lam), _per_element(mu), strain, out=out)


def dstress_drho_field(pair, rho, strain, out=None):
    """Pointwise d(stress)/d(rho) of a quadrature strain field."""
    dlam, dmu = pair.dmoduli(rho)
    return kernels.isotropic_apply(_per_element(dlam), _per_element(dmu), strain, out=out)
