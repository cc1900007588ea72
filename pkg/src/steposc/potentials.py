"""One-dimensional confining potentials and the step region.

Two kinds of potential are supported:

``harmonic``
    ``V(q) = omega**2 * q**2 / 2 - load * q``.  A nonzero ``load`` moves the
    minimum to ``load / omega**2`` and lowers it to ``-load**2 / (2 omega**2)``,
    which is how a step displaced from the potential minimum is modelled
    (the step itself stays at the origin).

``tabulated-even``
    Samples of an even potential on the half line ``q >= 0``.  The table is
    mirrored and interpolated with a monotone C1 cubic (PCHIP), so each side
    of the minimum stays monotone and ``V'(center) = 0``.  The minimum can be
    moved with ``center``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

HARMONIC = "harmonic"
TABULATED = "tabulated-even"


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    kind: str
    omega: float = 1.0
    load: float = 0.0
    center: float = 0.0
    table_q: Optional[np.ndarray] = None
    table_v: Optional[np.ndarray] = None
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False)

    @classmethod
    def harmonic(cls, omega: float = 1.0, load: float = 0.0) -> "PotentialSpec":
        if not omega > 0:
            raise DomainError(f"omega must be positive, got {omega}")
        return cls(HARMONIC, omega=float(omega), load=float(load))

    @classmethod
    def tabulated(cls, q, v, center: float = 0.0) -> "PotentialSpec":
        """Build an even potential from half-line samples ``(q, V(q))``, ``q[0] == 0``."""
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        if q.ndim != 1 or q.shape != v.shape or q.size < 3:
            raise DomainError("table must be two 1-D arrays of equal length >= 3")
        if q[0] != 0.0 or np.any(np.diff(q) <= 0):
            raise DomainError("table abscissae must start at 0 and increase strictly")
        if np.any(np.diff(v) <= 0):
            raise DomainError("tabulated potential must increase strictly away from its minimum")
        qq = np.concatenate([-q[:0:-1], q])
        vv = np.concatenate([v[:0:-1], v])
        interp = PchipInterpolator(qq, vv, extrapolate=False)
        return cls(TABULATED, center=float(center), table_q=q, table_v=v, _interp=interp)

    @classmethod
    def from_function(cls, func: Callable, q_max: float, n: int = 4001,
                      center: float = 0.0) -> "PotentialSpec":
        """Tabulate an even function on ``[0, q_max]`` with ``n`` samples."""
        q = np.linspace(0.0, q_max, n)
        return cls.tabulated(q, func(q), center=center)

    @property
    def is_harmonic(self) -> bool:
        return self.kind == HARMONIC

    @property
    def q_min_location(self) -> float:
        if self.is_harmonic:
            return self.load / self.omega ** 2
        return self.center

    @property
    def v_min(self) -> float:
        if self.is_harmonic:
            return -0.5 * self.load ** 2 / self.omega ** 2
        return float(self.table_v[0])

    @property
    def is_even(self) -> bool:
        """True when V is symmetric about q = 0 (needed for parity labels)."""
        return self.q_min_location == 0.0

    @property
    def domain(self) -> tuple:
        """Range of q on which V is defined."""
        if self.is_harmonic:
            return (-np.inf, np.inf)
        r = self.table_q[-1]
        return (self.center - r, self.center + r)

    @property
    def v_domain_max(self) -> float:
        """Largest energy whose level set lies inside :attr:`domain`."""
        if self.is_harmonic:
            return np.inf
        return float(self.table_v[-1])

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if self.is_harmonic:
            return 0.5 * self.omega ** 2 * q * q - self.load * q
        out = self._interp(q - self.center)
        if np.any(np.isnan(out)):
            raise DomainError("q outside the tabulated range")
        return out if out.ndim else float(out)

    def derivative(self, q):
        q = np.asarray(q, dtype=float)
        if self.is_harmonic:
            return self.omega ** 2 * q - self.load
        out = self._interp(q - self.center, 1)
        if np.any(np.isnan(out)):
            raise DomainError("q outside the tabulated range")
        return out if out.ndim else float(out)

    def shifted_copy(self, load: float) -> "PotentialSpec":
        if not self.is_harmonic:
            raise DomainError("load is only defined for harmonic potentials")
        return PotentialSpec.harmonic(self.omega, load)

    def describe(self) -> dict:
        if self.is_harmonic:
            return {"kind": HARMONIC, "omega": self.omega, "load": self.load}
        return {"kind": TABULATED, "center": self.center,
                "q": self.table_q.tolist(), "v": self.table_v.tolist()}

    @classmethod
    def from_description(cls, d: dict) -> "PotentialSpec":
        if d["kind"] == HARMONIC:
            return cls.harmonic(d.get("omega", 1.0), d.get("load", 0.0))
        if d["kind"] == TABULATED:
            return cls.tabulated(d["q"], d["v"], d.get("center", 0.0))
        raise DomainError(f"unknown potential kind {d['kind']!r}")


@dataclass(frozen=True)
class StepRegion:
    """Open region ``{q1 < q1_wall, q2 < q2_wall}`` the particle cannot enter."""

    q1_wall: float = 0.0
    q2_wall: float = 0.0

    def __post_init__(self):
        if self.q1_wall > 0 or self.q2_wall > 0:
            raise DomainError("wall coordinates must be nonpositive")

    @property
    def at_origin(self) -> bool:
        return self.q1_wall == 0.0 and self.q2_wall == 0.0

    def contains(self, q1, q2):
        """Strict interior test."""
        return (np.asarray(q1) < self.q1_wall) & (np.asarray(q2) < self.q2_wall)

    def contains_closed(self, q1, q2):
        return (np.asarray(q1) <= self.q1_wall) & (np.asarray(q2) <= self.q2_wall)
