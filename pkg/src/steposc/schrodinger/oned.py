"""One-dimensional eigenproblems on the axis grids."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal, LinAlgError

from ..errors import ConvergenceError, DomainError
from ..potentials import PotentialSpec
from .grid import Grid1D

EVEN, ODD, NONE = "even", "odd", "none"


@dataclass
class Spectrum1D:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # (n, K), sum |phi|^2 h = 1
    grid: Grid1D
    parity: list

    def __len__(self):
        return len(self.eigenvalues)

    def odd_indices(self):
        return [i for i, p in enumerate(self.parity) if p == ODD]


def _parity_of(phi: np.ndarray, symmetric: bool, tol: float = 1e-6) -> str:
    if not symmetric:
        return NONE
    scale = np.max(np.abs(phi))
    if np.max(np.abs(phi - phi[::-1])) <= tol * scale:
        return EVEN
    if np.max(np.abs(phi + phi[::-1])) <= tol * scale:
        return ODD
    return NONE


def solve_1d(V: PotentialSpec, grid: Grid1D, K: Optional[int] = None) -> Spectrum1D:
    """Lowest ``K`` levels of ``-1/2 d^2/dq^2 + V`` with Dirichlet ends.

    Parity labels are assigned when ``V`` is even about 0 and the grid is
    symmetric; otherwise every label is ``'none'``.  Sign convention: the
    first sample exceeding 1e-3 of the maximum is positive.
    """
    n, h = grid.n, grid.h
    K = n if K is None else K
    if not 1 <= K <= n:
        raise DomainError(f"K={K} out of range for {n} nodes")
    d = 1.0 / (h * h) + V(grid.q)
    e = np.full(n - 1, -0.5 / (h * h))
    try:
        w, X = eigh_tridiagonal(d, e, select="i", select_range=(0, K - 1))
    except LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(str(exc), np.empty(0), np.empty((n, 0)), np.empty(0))
    X = X / np.sqrt(h)
    for j in range(K):
        col = X[:, j]
        first = np.argmax(np.abs(col) > 1e-3 * np.max(np.abs(col)))
        if col[first] < 0:
            X[:, j] = -col
    symmetric = V.is_even and abs(V.q_min_location) < 1e-14 and grid.is_symmetric()
    parity = [_parity_of(X[:, j], symmetric) for j in range(K)]
    return Spectrum1D(w, X, grid, parity)
