"""Orchestration shared by the command line and the acceptance suite."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .potentials import PotentialSpec, StepRegion
from .schrodinger import (EXCLUDED, Spectrum, build_grid, build_hamiltonian,
                          lowest_eigenpairs)
from .schrodinger.grid import DEFAULT_CONFINEMENT, DEFAULT_PPW, Grid2D
from .semiclassics import inverse_weyl, volume_function
from .wavefn import DEFAULT_DELTA, MixingReport, mixing_metrics

log = logging.getLogger(__name__)


def harmonic_pair(omega, eps=(0.0, 0.0)):
    """``V_i = omega_i^2 q^2 / 2 - eps_i q``."""
    return (PotentialSpec.harmonic(float(omega[0]), float(eps[0])),
            PotentialSpec.harmonic(float(omega[1]), float(eps[1])))


def estimate_emax(V1: PotentialSpec, V2: PotentialSpec, step: Optional[StepRegion], K: int,
                  margin: float = 1.08, extra: int = 10) -> float:
    """Energy whose Weyl count is ``margin K + extra``: a grid target for ``K`` levels."""
    vol = volume_function(V1, V2, step if step is not None else StepRegion(-1e6, -1e6))
    target = margin * K + extra
    vmin = V1.v_min + V2.v_min
    hi = vmin + 1.0
    while vol(hi) / (4 * math.pi ** 2) < target:
        hi = vmin + 2.0 * (hi - vmin)
    return inverse_weyl(target, vol, hi)


def common_grid(potentials: Sequence[tuple], step: Optional[StepRegion], E_max: float,
                ppw: float = DEFAULT_PPW, confinement: float = DEFAULT_CONFINEMENT) -> Grid2D:
    """One grid adequate for every ``(V1, V2)`` pair, so fields can be compared."""
    grids = [build_grid(V1, V2, step, E_max, ppw, confinement) for V1, V2 in potentials]
    h = min(g.h1 for g in grids)
    ext = []
    for k in range(2):
        lo = min(g.extents[k][0] for g in grids)
        hi = max(g.extents[k][1] for g in grids)
        ext.append((lo, hi))
    V1, V2 = potentials[0]
    return build_grid(V1, V2, step, E_max, ppw, confinement, h=h, extents=ext)


def solve_on(grid: Grid2D, V1, V2, step, K: int, step_mode: str = EXCLUDED, tol: float = 1e-8,
             seed: int = 0, slice_size: int = 140, return_vectors: bool = True) -> Spectrum:
    ham = build_hamiltonian(grid, V1, V2, step, step_mode)
    return lowest_eigenpairs(ham, K, tol=tol, seed=seed, slice_size=slice_size,
                             return_vectors=return_vectors)


def solve_levels(V1, V2, step, K: int, ppw: float = DEFAULT_PPW,
                 confinement: float = DEFAULT_CONFINEMENT, E_max: Optional[float] = None,
                 **kw) -> Spectrum:
    """Lowest ``K`` levels with the grid sized from a Weyl estimate of ``E_K``."""
    E_max = estimate_emax(V1, V2, step, K) if E_max is None else E_max
    grid = build_grid(V1, V2, step, E_max, ppw, confinement)
    s = solve_on(grid, V1, V2, step, K, **kw)
    s.info["E_max"] = E_max
    s.info["ppw"] = ppw
    s.info["confinement"] = confinement
    return s


@dataclass
class MixingStudy:
    basis: Spectrum
    reports: List[MixingReport]
    grid: Grid2D
    info: dict = field(default_factory=dict)

    def rows(self):
        return [r.row() for r in self.reports]


def mixing_study(omega, step: StepRegion, N_list: Sequence[int], x_list: Sequence[float],
                 dN: int = 10, J: int = 400, delta: float = DEFAULT_DELTA,
                 eps_ratio: float = 0.5, ref_index: int = 301,
                 ppw: float = DEFAULT_PPW, confinement: float = DEFAULT_CONFINEMENT,
                 tol: float = 1e-8, seed: int = 0) -> MixingStudy:
    """P and T on a common grid for each ``N`` and scaled strength ``x``.

    The perturbation is ``-eps1 q1 - eps2 q2`` with ``eps2 = eps_ratio eps1`` and
    ``eps1 = x (E_ref / E_N)^(3/2)``, with unperturbed ``E_N`` and ``E_ref``.
    """
    V1, V2 = harmonic_pair(omega)
    K0 = max(J, ref_index, max(N_list) + dN - 1)
    E_max = estimate_emax(V1, V2, step, K0)
    vol = volume_function(V1, V2, step)
    # bound the largest field strength from Weyl estimates so one grid serves all solves
    E_ref_est = inverse_weyl(ref_index, vol, E_max * 1.5)
    E_lo_est = inverse_weyl(min(N_list), vol, E_max * 1.5)
    eps_hi = 1.25 * max(x_list) * (E_ref_est / E_lo_est) ** 1.5
    Vp = harmonic_pair(omega, (eps_hi, eps_ratio * eps_hi))
    grid = common_grid([(V1, V2), Vp], step, E_max, ppw, confinement)
    basis = solve_on(grid, V1, V2, step, K0, tol=tol, seed=seed)
    E_ref = float(basis.eigenvalues[ref_index - 1])
    reports = []
    for N in N_list:
        E_N = float(basis.eigenvalues[N - 1])
        for x in x_list:
            e1 = x * (E_ref / E_N) ** 1.5
            eps = (e1, eps_ratio * e1)
            if e1 > eps_hi:
                log.warning("eps1=%.4g exceeds the grid design value %.4g", e1, eps_hi)
            if x == 0:
                pert = basis
            else:
                P1, P2 = harmonic_pair(omega, eps)
                pert = solve_on(grid, P1, P2, step, N + dN - 1, tol=tol, seed=seed)
            reports.append(mixing_metrics(basis, pert, N, dN, J, delta, eps,
                                          ref_index=ref_index, E_ref=E_ref))
    info = {"E_max": E_max, "eps_design": eps_hi, "grid": grid.describe(), "E_ref": E_ref}
    return MixingStudy(basis, reports, grid, info)


def ebk_table(eigenvalues: np.ndarray, predicted: np.ndarray):
    """Nearest prediction for each computed level: ``(E, E_pred, E - E_pred)``."""
    p = np.sort(np.asarray(predicted))
    j = np.clip(np.searchsorted(p, eigenvalues), 1, len(p) - 1)
    left, right = p[j - 1], p[j]
    near = np.where(np.abs(eigenvalues - left) <= np.abs(right - eigenvalues), left, right)
    return np.column_stack([eigenvalues, near, eigenvalues - near])
