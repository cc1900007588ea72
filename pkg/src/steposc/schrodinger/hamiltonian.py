"""Five-point discretization of ``-1/2 Laplacian + V1(q1) + V2(q2)``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..errors import DomainError
from ..potentials import PotentialSpec, StepRegion
from .grid import Grid1D, Grid2D

EXCLUDED = "excluded-nodes"
PENALTY = "penalty"
PENALTY_VALUE = 1e28


@dataclass
class DiscreteHamiltonian:
    matrix: sp.csr_matrix
    grid: Grid2D
    active: np.ndarray  # flat boolean mask of unknowns on the full grid
    step_mode: str
    step: Optional[StepRegion]
    V1: PotentialSpec
    V2: PotentialSpec

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def to_field(self, vec: np.ndarray) -> np.ndarray:
        """Scatter unknowns (1-D, or 2-D with one column per vector) onto the grid."""
        vec = np.asarray(vec)
        if self.step_mode == PENALTY:
            out = vec.reshape((self.grid.n1, self.grid.n2) + vec.shape[1:]).copy()
            if self.step is not None:
                out[self.grid.step_mask(self.step)] = 0.0
            return out
        full = np.zeros((self.active.size,) + vec.shape[1:], dtype=vec.dtype)
        full[self.active] = vec
        return full.reshape((self.grid.n1, self.grid.n2) + vec.shape[1:])

    def from_field(self, field: np.ndarray) -> np.ndarray:
        flat = np.asarray(field).reshape(self.active.size)
        if self.step_mode == PENALTY:
            return flat.copy()
        return flat[self.active]


def second_difference(g: Grid1D) -> sp.csr_matrix:
    """``-1/2 d^2/dq^2`` with Dirichlet ends."""
    n, h = g.n, g.h
    c = 1.0 / (2.0 * h * h)
    return sp.diags([np.full(n - 1, -c), np.full(n, 2.0 * c), np.full(n - 1, -c)],
                    [-1, 0, 1], format="csr")


def hamiltonian_1d(V: PotentialSpec, g: Grid1D) -> sp.csr_matrix:
    return (second_difference(g) + sp.diags(V(g.q))).tocsr()


def build_hamiltonian(grid: Grid2D, V1: PotentialSpec, V2: PotentialSpec,
                      step: Optional[StepRegion], step_mode: str = EXCLUDED) -> DiscreteHamiltonian:
    """Assemble the operator; ``step=None`` gives the smooth oscillator."""
    if step_mode not in (EXCLUDED, PENALTY):
        raise DomainError(f"unknown step_mode {step_mode!r}")
    H1 = hamiltonian_1d(V1, grid.g1)
    H2 = hamiltonian_1d(V2, grid.g2)
    H = (sp.kron(H1, sp.identity(grid.n2, format="csr"))
         + sp.kron(sp.identity(grid.n1, format="csr"), H2)).tocsr()
    if step is None:
        in_step = np.zeros(grid.n1 * grid.n2, dtype=bool)
    else:
        in_step = grid.step_mask(step).ravel()
    if step_mode == PENALTY:
        H = (H + sp.diags(np.where(in_step, PENALTY_VALUE, 0.0))).tocsr()
        active = np.ones(in_step.size, dtype=bool)
    else:
        active = ~in_step
        H = H[active][:, active].tocsr()
    H.sort_indices()
    return DiscreteHamiltonian(H, grid, active, step_mode, step, V1, V2)
