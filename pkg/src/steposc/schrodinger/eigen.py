"""Lowest eigenpairs of the discrete Hamiltonian by sliced shift-invert Lanczos.

Each slice factorizes ``H - sigma`` once (SuperLU) and asks ARPACK for the
``k`` eigenvalues nearest ``sigma``.  Those form every eigenvalue inside a
ball around ``sigma``; a slice accepts the part above the previous cut and
below a cut placed in the widest spectral gap near its upper edge, so
degenerate clusters are never split across slices.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh, splu, ArpackNoConvergence

from ..errors import ConvergenceError, DomainError
from .hamiltonian import DiscreteHamiltonian

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_SLICE = 140


@dataclass
class Spectrum:
    """Sorted eigenvalues with eigenvectors as grid fields.

    ``vectors`` holds the unknowns (one column per level), normalized so that
    ``sum |psi|^2 h1 h2 = 1``; use :meth:`field` for the full-grid array.
    """

    eigenvalues: np.ndarray
    vectors: Optional[np.ndarray]
    residuals: np.ndarray
    hamiltonian: Optional[DiscreteHamiltonian] = None
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def grid(self):
        return None if self.hamiltonian is None else self.hamiltonian.grid

    def field(self, i: int) -> np.ndarray:
        if self.vectors is None:
            raise DomainError("spectrum was computed without eigenvectors")
        return self.hamiltonian.to_field(self.vectors[:, i])

    def fields(self, idx=None) -> np.ndarray:
        """Stack of fields with shape ``(len(idx), n1, n2)``."""
        idx = range(len(self)) if idx is None else idx
        return np.stack([self.field(i) for i in idx])

    def orthonormality_error(self) -> float:
        if self.vectors is None:
            return float("nan")
        w = self.hamiltonian.grid.cell_area
        G = (self.vectors.T @ self.vectors) * w
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))

    def head(self, K: int) -> "Spectrum":
        v = None if self.vectors is None else self.vectors[:, :K]
        return Spectrum(self.eigenvalues[:K], v, self.residuals[:K], self.hamiltonian, dict(self.info))


def _lower_bound(A: sp.csr_matrix) -> float:
    """Gershgorin lower bound of the spectrum."""
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - off))


def _residuals(A, vals, vecs) -> np.ndarray:
    R = A @ vecs - vecs * vals
    return np.linalg.norm(R, axis=0) / np.maximum(np.linalg.norm(vecs, axis=0), 1e-300)


def _split_point(vals: np.ndarray, top: float, frac: float = 0.3) -> float:
    """Cut inside the widest gap among the upper ``frac`` of ``vals`` below ``top``."""
    inside = vals[vals < top]
    if inside.size < 2:
        return -math.inf
    start = max(0, int(inside.size * (1.0 - frac)) - 1)
    tail = inside[start:]
    gaps = np.diff(tail)
    j = int(np.argmax(gaps))
    return 0.5 * (tail[j] + tail[j + 1])


def lowest_eigenpairs(ham: DiscreteHamiltonian, K: int, tol: float = DEFAULT_TOL,
                      seed: int = 0, slice_size: int = DEFAULT_SLICE,
                      return_vectors: bool = True, max_attempts: int = 8) -> Spectrum:
    """Lowest ``K`` eigenpairs in ascending order.

    Parameters
    ----------
    ham : DiscreteHamiltonian
    K : int
        Number of levels.
    tol : float
        Required residual ``||H psi - E psi|| / ||psi||``.
    seed : int
        Seeds the Lanczos start vectors, making runs bitwise reproducible.
    slice_size : int
        Eigenvalues requested per shift-invert slice.

    Raises
    ------
    ConvergenceError
        With whatever was converged, when a slice fails or a residual exceeds ``tol``.
    """
    A = ham.matrix.tocsc()
    n = A.shape[0]
    if K < 1:
        raise DomainError("K must be positive")
    if K >= n - 1:
        raise DomainError(f"K={K} too large for {n} unknowns")
    rng = np.random.default_rng(seed)
    k_req = min(max(slice_size, 2), n - 2)
    ident = sp.identity(n, format="csc")

    vals_acc, vecs_acc = [], []
    cut = -math.inf
    sigma = _lower_bound(A) - 1.0
    n_slices = 0
    count = 0

    def partial():
        v = np.concatenate(vals_acc) if vals_acc else np.empty(0)
        X = np.hstack(vecs_acc) if vecs_acc else np.empty((n, 0))
        return v, X

    while count < K:
        attempt = 0
        while True:
            attempt += 1
            if attempt > max_attempts:
                v, X = partial()
                raise ConvergenceError(f"slice near sigma={sigma:.6g} did not cover the spectrum",
                                       v, X, _residuals(A, v, X) if v.size else np.empty(0))
            lu = splu((A - sigma * ident).tocsc())
            op = LinearOperator((n, n), matvec=lu.solve, dtype=float)
            try:
                vals, vecs = eigsh(A, k=k_req, sigma=sigma, which="LM", OPinv=op,
                                   v0=rng.standard_normal(n), tol=0.0)
            except ArpackNoConvergence as exc:
                v, X = partial()
                raise ConvergenceError(f"ARPACK did not converge at sigma={sigma:.6g}: {exc}",
                                       v, X, _residuals(A, v, X) if v.size else np.empty(0))
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
            radius = float(np.max(np.abs(vals - sigma)))
            cluster = 1e-9 * max(1.0, abs(sigma))
            if sigma - radius <= cut - cluster or not np.isfinite(cut):
                break
            # the ball does not reach back to the last cut: shift down and retry
            sigma = cut + 0.5 * (sigma - cut) if np.isfinite(cut) else sigma - radius
        top = sigma + radius - cluster
        upper = _split_point(vals, top)
        if upper <= cut:
            upper = top
        sel = (vals > cut) & (vals < upper)
        vals_acc.append(vals[sel])
        vecs_acc.append(vecs[:, sel])
        count += int(sel.sum())
        n_slices += 1
        log.debug("slice %d: sigma=%.6g radius=%.4g accepted %d (total %d)",
                  n_slices, sigma, radius, int(sel.sum()), count)
        # next shift: about 40% of a slice width beyond the cut
        width = max(upper - max(cut, vals[0]), 1e-12)
        density = max(sel.sum(), 1) / width
        cut = upper
        sigma = cut + 0.4 * k_req / (2.0 * density)

    ev, X = partial()
    ev, X = ev[:K], X[:, :K]
    if ham.step_mode == "penalty" and ham.step is not None:
        # the exact field is O(1/penalty) on the step; ARPACK leaves rounding
        # noise there that the penalty amplifies, so pin it and test free rows
        pen = ham.grid.step_mask(ham.step).ravel()
        X[pen] = 0.0
        res = np.linalg.norm((A @ X - X * ev)[~pen], axis=0) / np.linalg.norm(X, axis=0)
    else:
        res = _residuals(A, ev, X)
    X = X / np.linalg.norm(X, axis=0)
    X = X / math.sqrt(ham.grid.cell_area)
    if np.any(res > tol):
        raise ConvergenceError(f"max residual {res.max():.3g} exceeds tol {tol:.1g}",
                               ev, X, res)
    info = {"slices": n_slices, "unknowns": n, "seed": seed, "tol": tol,
            "step_mode": ham.step_mode}
    return Spectrum(ev, X if return_vectors else None, res, ham, info)


def eigenvalues_dense(ham: DiscreteHamiltonian) -> np.ndarray:
    """Full spectrum by dense diagonalization (small grids, tests)."""
    return np.linalg.eigvalsh(ham.matrix.toarray())
