"""Particle density, paramagnetic current and total current of a state.

For a normalized wavefunction psi and vector potential A:

    rho  = |psi|^2
    j_p  = Im(conj(psi) grad psi)
    j    = j_p + rho A          (gauge-invariant physical current)

A DensityPair bundles (rho, j) with a provenance tag naming the generating
state, which is how report files stay traceable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import RepresentationError
from .grid import (
    ComplexField,
    ScalarField,
    VectorField,
    divergence,
    integrate,
    norm_l2,
    require_same_grid,
    _dx,
    _dy,
)

__all__ = [
    "DensityPair",
    "particle_density",
    "paramagnetic_current",
    "total_current",
    "continuity_residual",
    "density_pair_from_state",
]

NEGATIVE_RHO_TOL = 1e-12      # round-off dips below zero are clamped
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DensityPair:
    """(rho, j) with unit total probability and non-negative density."""

    rho: ScalarField
    j: VectorField
    provenance: str = ""

    def __post_init__(self):
        require_same_grid(self.rho, self.j)
        vals = self.rho.values
        if vals.min() < -NEGATIVE_RHO_TOL:
            raise ValueError(
                f"density has a negative entry {vals.min():.3e} beyond round-off"
            )
        if vals.min() < 0.0:
            object.__setattr__(
                self, "rho", ScalarField(self.rho.grid, np.maximum(vals, 0.0))
            )
        mass = integrate(self.rho)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise RepresentationError(
                f"density integrates to {mass!r}, expected 1 within {NORMALIZATION_TOL:g}"
            )


def particle_density(psi: ComplexField) -> ScalarField:
    """rho = |psi|^2 for a normalized state."""
    nrm2 = norm_l2(psi) ** 2
    if abs(nrm2 - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"state is not normalized: |psi|^2 = {nrm2!r}")
    return ScalarField(psi.grid, np.abs(psi.values) ** 2)


def paramagnetic_current(psi: ComplexField) -> VectorField:
    """j_p = Im(conj(psi) grad psi)."""
    h = psi.grid.h
    c = np.conj(psi.values)
    return VectorField(
        psi.grid,
        np.stack([np.imag(c * _dx(psi.values, h)), np.imag(c * _dy(psi.values, h))]),
    )


def total_current(psi: ComplexField, A: VectorField) -> VectorField:
    """j = j_p + |psi|^2 A."""
    require_same_grid(psi, A)
    rho = np.abs(psi.values) ** 2
    jp = paramagnetic_current(psi)
    return VectorField(psi.grid, np.stack([jp.x + rho * A.x, jp.y + rho * A.y]))


def continuity_residual(j: VectorField) -> float:
    """Quadrature L2 norm of div j over interior nodes.

    Vanishes (to discretization error) for the current of any stationary
    state; strictly positive for non-solenoidal fields.
    """
    div = divergence(j).values[1:-1, 1:-1]
    w = j.grid.quad_weights[1:-1, 1:-1]
    return float(np.sqrt(np.sum(w * div**2)))


def density_pair_from_state(psi: ComplexField, A: VectorField,
                            provenance: str = "") -> DensityPair:
    """Bundle the densities of a normalized state into a DensityPair."""
    return DensityPair(particle_density(psi), total_current(psi, A), provenance)
