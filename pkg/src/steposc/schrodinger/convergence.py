"""Grid refinement studies: observed order and Richardson extrapolation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError


@dataclass
class ConvergenceReport:
    spacings: np.ndarray  # h per grid, coarse to fine
    values: np.ndarray  # (n_grids, K)
    observed_order: np.ndarray  # (K,), from the three finest grids
    extrapolated: np.ndarray  # (K,)
    error_estimate: np.ndarray  # |extrapolated - finest|
    monotone: np.ndarray  # (K,) bool, consecutive differences share a sign

    @property
    def finest(self) -> np.ndarray:
        return self.values[-1]

    def as_rows(self):
        cols = ["level"] + [f"h={h:.6g}" for h in self.spacings] + ["order", "extrapolated", "error"]
        rows = [cols]
        for k in range(self.values.shape[1]):
            rows.append([k + 1] + list(self.values[:, k]) + [self.observed_order[k],
                        self.extrapolated[k], self.error_estimate[k]])
        return rows


def richardson_two(coarse, fine, ratio: float = 2.0, order: float = 2.0):
    f = ratio ** order
    return (f * np.asarray(fine) - np.asarray(coarse)) / (f - 1.0)


def observed_order(e_h, e_h2, e_h4, ratio: float = 2.0):
    d1 = np.asarray(e_h) - np.asarray(e_h2)
    d2 = np.asarray(e_h2) - np.asarray(e_h4)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.abs(d1 / d2)) / math.log(ratio)


def richardson(values: np.ndarray, ratio: float = 2.0, order: float = 2.0) -> np.ndarray:
    """Repeated Richardson elimination of ``h^order, h^(order+2), ...`` terms.

    ``values`` has one row per grid, coarse to fine, with ``h`` shrinking by
    ``ratio`` each time.  The second-order five-point scheme has an even error
    expansion, so successive orders are 2, 4, 6, ...
    """
    T = [np.asarray(v, dtype=float) for v in values]
    p = order
    while len(T) > 1:
        T = [richardson_two(T[i], T[i + 1], ratio, p) for i in range(len(T) - 1)]
        p += 2.0
    return T[0]


def convergence_study(solve: Callable[[float], np.ndarray], spacings: Sequence[float],
                      K: int, order: float = 2.0) -> ConvergenceReport:
    """Run ``solve(h)`` on at least three grids and extrapolate the lowest ``K`` levels.

    ``spacings`` must halve from one grid to the next (coarse first).
    """
    hs = np.asarray(spacings, dtype=float)
    if hs.size < 3:
        raise DomainError("a convergence study needs at least three grids")
    ratios = hs[:-1] / hs[1:]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise DomainError("grid spacings must shrink by a constant ratio")
    vals = np.array([np.asarray(solve(h))[:K] for h in hs])
    r = float(ratios[0])
    p = observed_order(vals[-3], vals[-2], vals[-1], r)
    ext = richardson(vals, r, order)
    d = np.diff(vals, axis=0)
    mono = np.all(np.sign(d) == np.sign(d[0]), axis=0)
    return ConvergenceReport(hs, vals, p, ext, np.abs(ext - vals[-1]), mono)
