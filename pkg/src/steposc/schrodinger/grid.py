"""Uniform finite-difference grids aligned with the step walls."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..classical.geometry import turning_points
from ..errors import DomainError, SizingError
from ..potentials import PotentialSpec, StepRegion

DEFAULT_PPW = 8.0
DEFAULT_CONFINEMENT = 1.8
# rough bytes per active node for the factorization plus a few hundred vectors
_BYTES_PER_NODE = 8 * 600
DEFAULT_MEMORY_BUDGET = 3.0e9


@dataclass(frozen=True)
class Grid1D:
    """Interior nodes ``q[j] = origin + (j0 + j) h``; Dirichlet just outside."""

    q: np.ndarray
    h: float

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def extent(self) -> Tuple[float, float]:
        return (float(self.q[0] - self.h), float(self.q[-1] + self.h))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.q, -self.q[::-1], atol=tol * max(1.0, abs(self.q[-1]))))

    def index_of(self, x: float) -> int:
        j = int(round((x - self.q[0]) / self.h))
        if not (0 <= j < self.n) or abs(self.q[j] - x) > 1e-9 * self.h:
            raise DomainError(f"{x} is not a grid node")
        return j


@dataclass(frozen=True)
class Grid2D:
    g1: Grid1D
    g2: Grid1D

    @property
    def n1(self) -> int:
        return self.g1.n

    @property
    def n2(self) -> int:
        return self.g2.n

    @property
    def h1(self) -> float:
        return self.g1.h

    @property
    def h2(self) -> float:
        return self.g2.h

    @property
    def q1(self) -> np.ndarray:
        return self.g1.q

    @property
    def q2(self) -> np.ndarray:
        return self.g2.q

    @property
    def extents(self):
        return (self.g1.extent, self.g2.extent)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    def mesh(self):
        return np.meshgrid(self.q1, self.q2, indexing="ij")

    def step_mask(self, step: StepRegion) -> np.ndarray:
        """Nodes in the closed step; their values are pinned to zero."""
        Q1, Q2 = self.mesh()
        return step.contains_closed(Q1, Q2)

    def same_as(self, other: "Grid2D") -> bool:
        return (self.shape == other.shape and np.array_equal(self.q1, other.q1)
                and np.array_equal(self.q2, other.q2))

    def describe(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "h1": self.h1, "h2": self.h2,
                "q1_first": float(self.q1[0]), "q2_first": float(self.q2[0]),
                "extents": [list(self.g1.extent), list(self.g2.extent)],
                "ordering": "row-major (q1 slow, q2 fast)",
                "q1": self.q1.tolist(), "q2": self.q2.tolist()}

    @classmethod
    def from_description(cls, d: dict) -> "Grid2D":
        # explicit node lists keep wall nodes exact; the affine form is a fallback
        q1 = np.array(d["q1"]) if "q1" in d else d["q1_first"] + d["h1"] * np.arange(d["n1"])
        q2 = np.array(d["q2"]) if "q2" in d else d["q2_first"] + d["h2"] * np.arange(d["n2"])
        g1 = Grid1D(q1, d["h1"])
        g2 = Grid1D(q2, d["h2"])
        return cls(g1, g2)


def spacing_for(E_kin: float, ppw: float) -> float:
    """``h = lambda_min / ppw`` with ``lambda_min = 2 pi / sqrt(2 E_kin)``."""
    if ppw < 4:
        raise DomainError("points_per_wavelength must be at least 4")
    if E_kin <= 0:
        raise DomainError("E_max must lie above the potential minimum")
    return 2.0 * math.pi / math.sqrt(2.0 * E_kin) / ppw


def axis_extent(V: PotentialSpec, E_kin: float, confinement: float) -> Tuple[float, float]:
    """Interval on which ``V - min V <= confinement * E_kin``."""
    return turning_points(V, V.v_min + confinement * E_kin)


def aligned_axis(lo: float, hi: float, h: float, anchor: float) -> Grid1D:
    """Interior nodes on ``anchor + j h`` whose Dirichlet boundary encloses ``[lo, hi]``."""
    j_lo = math.floor((lo - anchor) / h + 1e-9)
    j_hi = math.ceil((hi - anchor) / h - 1e-9)
    j = np.arange(j_lo + 1, j_hi)
    return Grid1D(anchor + j * h, h)


def build_grid_1d(V: PotentialSpec, E_max: float, ppw: float = DEFAULT_PPW,
                  confinement: float = DEFAULT_CONFINEMENT, anchor: float = 0.0,
                  h: Optional[float] = None, extent: Optional[Tuple[float, float]] = None) -> Grid1D:
    E_kin = E_max - V.v_min
    h = spacing_for(E_kin, ppw) if h is None else h
    lo, hi = extent if extent is not None else axis_extent(V, E_kin, confinement)
    if extent is not None:
        lo, hi = lo + 0.5 * h, hi - 0.5 * h
    return aligned_axis(lo, hi, h, anchor)


def build_grid(V1: PotentialSpec, V2: PotentialSpec, step: Optional[StepRegion], E_max: float,
               points_per_wavelength: float = DEFAULT_PPW,
               confinement: float = DEFAULT_CONFINEMENT, h: Optional[float] = None,
               extents=None, memory_budget: float = DEFAULT_MEMORY_BUDGET) -> Grid2D:
    """Grid resolving wavelengths down to ``lambda_min`` and containing the Hill region.

    ``extents`` (the Dirichlet boundary positions per axis) can be given to
    reproduce the domain of another grid, e.g. in a refinement sequence.
    Nodes lie on the wall coordinates so the step boundary is exactly on the grid;
    ``step=None`` (smooth problem) anchors the nodes at 0.
    """
    walls = (0.0, 0.0) if step is None else (step.q1_wall, step.q2_wall)
    E_kin = E_max - (V1.v_min + V2.v_min)
    h = spacing_for(E_kin, points_per_wavelength) if h is None else h
    gs = []
    for k, (V, qw) in enumerate(((V1, walls[0]), (V2, walls[1]))):
        if extents is not None:
            lo, hi = extents[k]
            gs.append(aligned_axis(lo + 0.5 * h, hi - 0.5 * h, h, qw))
        else:
            lo, hi = axis_extent(V, E_kin, confinement)
            gs.append(aligned_axis(lo, hi, h, qw))
    grid = Grid2D(*gs)
    n_nodes = grid.n1 * grid.n2
    need = n_nodes * _BYTES_PER_NODE
    if need > memory_budget:
        factor = math.sqrt(need / memory_budget)
        raise SizingError(
            f"grid {grid.n1}x{grid.n2} needs about {need / 1e9:.1f} GB "
            f"(budget {memory_budget / 1e9:.1f} GB); reduce points_per_wavelength by "
            f"a factor {factor:.2f}, lower E_max, or reduce the confinement factor")
    return grid
