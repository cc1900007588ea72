"""Finite-difference Schrodinger solver for the step oscillator."""
from .grid import Grid1D, Grid2D, build_grid, build_grid_1d, spacing_for
from .hamiltonian import (EXCLUDED, PENALTY, PENALTY_VALUE, DiscreteHamiltonian,
                          build_hamiltonian, hamiltonian_1d)
from .eigen import Spectrum, lowest_eigenpairs, eigenvalues_dense
from .oned import Spectrum1D, solve_1d
from .convergence import ConvergenceReport, convergence_study, observed_order, richardson


def solve(V1, V2, step, K, E_max, points_per_wavelength=8.0, confinement=1.8,
          step_mode=EXCLUDED, tol=1e-8, seed=0, slice_size=140, extents=None,
          return_vectors=True):
    """Grid, operator and lowest ``K`` eigenpairs in one call."""
    grid = build_grid(V1, V2, step, E_max, points_per_wavelength, confinement, extents=extents)
    ham = build_hamiltonian(grid, V1, V2, step, step_mode)
    return lowest_eigenpairs(ham, K, tol=tol, seed=seed, slice_size=slice_size,
                             return_vectors=return_vectors)


__all__ = [
    "Grid1D", "Grid2D", "build_grid", "build_grid_1d", "spacing_for",
    "EXCLUDED", "PENALTY", "PENALTY_VALUE", "DiscreteHamiltonian", "build_hamiltonian",
    "hamiltonian_1d", "Spectrum", "lowest_eigenpairs", "eigenvalues_dense",
    "Spectrum1D", "solve_1d", "ConvergenceReport", "convergence_study",
    "observed_order", "richardson", "solve",
]
