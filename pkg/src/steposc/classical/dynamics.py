"""Separable oscillator dynamics with elastic reflections off the step.

Between impacts the two axes evolve independently.  Harmonic axes are
advanced by exact rotation in ``(q - q_c, p / omega)``; other potentials go
through the symplectic integrator in :mod:`steposc.kernels`.  Only the normal
momentum flips at an impact, so both partial energies are invariants.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .. import kernels
from ..errors import CornerCollisionError, DomainError
from ..potentials import PotentialSpec, StepRegion

TWO_PI = 2.0 * math.pi
CORNER_TOL = 1e-10
TIME_TOL = 1e-12

EVENT_NAMES = ("none", "impact1", "impact2", "turn1", "turn2")
EVENT_CODES = {name: i for i, name in enumerate(EVENT_NAMES)}


@dataclass
class ClassicalState:
    q1: float
    q2: float
    p1: float
    p2: float
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.p1, self.p2])


@dataclass
class Trajectory:
    t: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    events: np.ndarray  # integer codes into EVENT_NAMES

    def __len__(self):
        return len(self.t)

    @property
    def states(self) -> np.ndarray:
        return np.column_stack([self.q1, self.q2, self.p1, self.p2])

    def event_names(self) -> List[str]:
        return [EVENT_NAMES[c] for c in self.events]

    def count(self, name: str) -> int:
        return int(np.count_nonzero(self.events == EVENT_CODES[name]))

    def select(self, name: str) -> "Trajectory":
        m = self.events == EVENT_CODES[name]
        return Trajectory(self.t[m], self.q1[m], self.q2[m], self.p1[m], self.p2[m], self.events[m])

    def partial_energies(self, V1: PotentialSpec, V2: PotentialSpec) -> np.ndarray:
        return np.column_stack([0.5 * self.p1 ** 2 + V1(self.q1),
                                0.5 * self.p2 ** 2 + V2(self.q2)])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "q1", "q2", "p1", "p2", "event"])
            for row in zip(self.t, self.q1, self.q2, self.p1, self.p2, self.events):
                w.writerow([repr(float(x)) for x in row[:5]] + [EVENT_NAMES[row[5]]])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        cols = {k: [] for k in ("t", "q1", "q2", "p1", "p2", "event")}
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                for k in cols:
                    cols[k].append(rec[k])
        return cls(*(np.array(cols[k], dtype=float) for k in ("t", "q1", "q2", "p1", "p2")),
                   np.array([EVENT_CODES[e] for e in cols["event"]], dtype=np.int64))

    @classmethod
    def from_rows(cls, rows) -> "Trajectory":
        a = np.asarray(rows, dtype=float).reshape(-1, 6)
        return cls(a[:, 0].copy(), a[:, 1].copy(), a[:, 2].copy(), a[:, 3].copy(),
                   a[:, 4].copy(), a[:, 5].astype(np.int64))


@dataclass
class TrajectorySummary:
    mu: tuple
    b: tuple
    period: Optional[float]
    is_periodic: bool
    n_impacts: tuple = (0, 0)
    extra: dict = field(default_factory=dict)


def _rtsafe(f, df, a, b, x0, tol=TIME_TOL, maxit=100):
    """Newton iteration kept inside the bracket ``[a, b]``; bisects when Newton strays."""
    fa = f(a)
    x = min(max(x0, a), b)
    for _ in range(maxit):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b = x
        d = df(x)
        xn = x - fx / d if d != 0.0 else 0.5 * (a + b)
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        if abs(xn - x) < tol or b - a < tol:
            return xn
        x = xn
    return x


class _HarmonicAxis:
    """Exact rotation of one harmonic degree of freedom.

    The phase point is stored as an angle ``theta`` at a reference time, with
    ``q = q_c + A cos(theta)``, ``p = -omega A sin(theta)``.
    """

    def __init__(self, V: PotentialSpec, q: float, p: float, t: float):
        self.omega = V.omega
        self.qc = V.q_min_location
        u, v = q - self.qc, p / self.omega
        self.amp = math.hypot(u, v)
        self.theta0 = math.atan2(-v, u)
        self.t0 = t

    def theta(self, t):
        return self.theta0 + self.omega * (t - self.t0)

    def q(self, t):
        return self.qc + self.amp * math.cos(self.theta(t))

    def p(self, t):
        return -self.omega * self.amp * math.sin(self.theta(t))

    def next_phase_time(self, target, t, guard=1e-13):
        """First time after ``t`` at which the phase equals ``target`` mod 2 pi."""
        d = (target - self.theta(t)) % TWO_PI
        # phases are only resolved to about omega * ulp(t) at late times
        if d < max(guard, 64.0 * self.omega * math.ulp(t)):
            d += TWO_PI
        return t + d / self.omega

    def next_turn(self, t):
        ta = self.next_phase_time(0.0, t)
        tb = self.next_phase_time(math.pi, t)
        return min(ta, tb)

    def wall_phase(self, q_wall):
        c = (q_wall - self.qc) / self.amp if self.amp > 0 else 2.0
        if c <= -1.0 or c >= 1.0:
            return None
        return math.acos(c)

    def next_left_crossing(self, q_wall, t):
        """Next time q decreases through ``q_wall`` (None if never)."""
        th_w = self.wall_phase(q_wall)
        if th_w is None:
            return None
        # a crossing just passed without reflection must not be found again
        t_est = self.next_phase_time(th_w, t, guard=1e-9)
        # monotone bracket between the enclosing turning points
        a = t_est - th_w / self.omega
        b = t_est + (math.pi - th_w) / self.omega
        return _rtsafe(lambda s: self.q(s) - q_wall, lambda s: self.p(s),
                       max(a, t), b, t_est)

    def reflect(self, t):
        """Flip the momentum at time t (q unchanged)."""
        th = -self.theta(t)
        self.theta0, self.t0 = th, t


def _check_initial(state: ClassicalState, step: StepRegion):
    if step.contains(state.q1, state.q2):
        raise DomainError("initial state lies inside the step")


def _integrate_harmonic(state, V1, V2, step, t_max, max_impacts):
    t = state.t
    ax1 = _HarmonicAxis(V1, state.q1, state.p1, t)
    ax2 = _HarmonicAxis(V2, state.q2, state.p2, t)
    rows = [(t, state.q1, state.q2, state.p1, state.p2, 0)]
    impacts = 0

    def row(s, code):
        return (s, ax1.q(s), ax2.q(s), ax1.p(s), ax2.p(s), code)

    while True:
        cand = [(ax1.next_turn(t), 3), (ax2.next_turn(t), 4)]
        c1 = ax1.next_left_crossing(step.q1_wall, t)
        if c1 is not None:
            cand.append((c1, 1))
        c2 = ax2.next_left_crossing(step.q2_wall, t)
        if c2 is not None:
            cand.append((c2, 2))
        t_ev, code = min(cand)
        if t_ev > t_max:
            break
        t = t_ev
        if code == 1:
            q2 = ax2.q(t)
            if abs(q2 - step.q2_wall) < CORNER_TOL:
                raise CornerCollisionError(f"corner hit at t={t}", Trajectory.from_rows(rows))
            if q2 >= step.q2_wall:
                continue
            ax1.reflect(t)
            impacts += 1
        elif code == 2:
            q1 = ax1.q(t)
            if abs(q1 - step.q1_wall) < CORNER_TOL:
                raise CornerCollisionError(f"corner hit at t={t}", Trajectory.from_rows(rows))
            if q1 >= step.q1_wall:
                continue
            ax2.reflect(t)
            impacts += 1
        rows.append(row(t, code))
        if max_impacts is not None and impacts >= max_impacts:
            break
    return Trajectory.from_rows(rows)


def _integrate_general(state, V1, V2, step, t_max, max_impacts, dt):
    rows, status = kernels.integrate_impacts(
        np.array([state.q1, state.p1, state.q2, state.p2]), state.t,
        kernels.axis_params(V1), kernels.axis_params(V2),
        step.q1_wall, step.q2_wall, dt, t_max,
        -1 if max_impacts is None else int(max_impacts), CORNER_TOL)
    traj = Trajectory.from_rows(rows)
    if status == kernels.STATUS_CORNER:
        raise CornerCollisionError("corner hit", traj)
    return traj


def integrate_with_impacts(state: ClassicalState, V1: PotentialSpec, V2: PotentialSpec,
                           step: StepRegion, t_max: float = math.inf,
                           max_impacts: Optional[int] = None, dt: float = 1e-3,
                           periodicity_tol: float = 1e-8):
    """Integrate until ``t_max`` or until ``max_impacts`` impacts have happened.

    Returns the event trajectory (initial state, impacts and turning points)
    and its :class:`TrajectorySummary`.
    """
    if math.isinf(t_max) and max_impacts is None:
        raise DomainError("need a finite horizon (t_max or max_impacts)")
    _check_initial(state, step)
    if V1.is_harmonic and V2.is_harmonic:
        traj = _integrate_harmonic(state, V1, V2, step, t_max, max_impacts)
    else:
        traj = _integrate_general(state, V1, V2, step, t_max, max_impacts, dt)
    return traj, detect_periodicity(traj, periodicity_tol)


def detect_periodicity(traj: Trajectory, tol: float = 1e-8) -> TrajectorySummary:
    """Find the first return of the first event state.

    Event states are compared in the phase-space max norm; when a return is
    found the turning points and impacts in one period are counted.
    """
    ev = traj.events
    idx = np.flatnonzero(ev != 0)
    counts = lambda sl: (
        (int(np.count_nonzero(ev[sl] == 3)), int(np.count_nonzero(ev[sl] == 4))),
        (int(np.count_nonzero(ev[sl] == 1)), int(np.count_nonzero(ev[sl] == 2))))
    n_imp = (traj.count("impact1"), traj.count("impact2"))
    if len(idx) >= 2:
        S = traj.states
        i0 = idx[0]
        for j in idx[1:]:
            if ev[j] == ev[i0] and np.max(np.abs(S[j] - S[i0])) < tol:
                mu, b = counts(slice(i0, j))
                return TrajectorySummary(mu, b, float(traj.t[j] - traj.t[i0]), True, n_imp)
    mu, b = counts(slice(None))
    return TrajectorySummary(mu, b, None, False, n_imp)


@dataclass(frozen=True)
class FamilyDescriptor:
    mu: tuple
    b: tuple
    label: str


def resonant_family(m: int) -> List[FamilyDescriptor]:
    """Periodic-orbit families for ``omega = (1, 1/m)`` with the step at the origin."""
    if not isinstance(m, (int, np.integer)) or m <= 0:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    if m % 2:
        return [FamilyDescriptor((3 * m, 3), (m, 1), "single")]
    return [FamilyDescriptor((2 * m, 2), (m, 0), "I"),
            FamilyDescriptor((m, 1), (0, 1), "II")]


def initial_state_on_level_set(V1: PotentialSpec, V2: PotentialSpec, E1: float, E2: float,
                               theta1: float, theta2: float, t: float = 0.0) -> ClassicalState:
    """Phase point with the given partial energies and smooth-system angles (harmonic)."""
    from .geometry import turning_points
    vals = []
    for V, E, th in ((V1, E1, theta1), (V2, E2, theta2)):
        if not V.is_harmonic:
            raise DomainError("angle-based initial states need harmonic potentials")
        lo, hi = turning_points(V, E)
        amp = 0.5 * (hi - lo)
        vals.append((V.q_min_location + amp * math.cos(th), -V.omega * amp * math.sin(th)))
    return ClassicalState(vals[0][0], vals[1][0], vals[0][1], vals[1][1], t)


def impact_sequence(traj: Trajectory) -> Sequence[str]:
    return [EVENT_NAMES[c] for c in traj.events if c in (1, 2)]


def scan_families(m: int, E1: float = 2.0, E2: float = 2.0, n_phases: int = 24,
                  n_periods: float = 6.0, tol: float = 1e-8) -> List[tuple]:
    """Distinct ``(mu, b)`` of the periodic orbits met by a phase scan.

    Harmonic axes ``omega = (1, 1/m)``, step at the origin, partial energies
    ``(E1, E2)``; the second-axis angle sweeps ``(-pi, pi)`` with the first
    axis started at its right turning point.  Initial points inside the step
    and orbits that hit the corner are skipped.
    """
    from ..potentials import PotentialSpec
    V1, V2 = PotentialSpec.harmonic(1.0), PotentialSpec.harmonic(1.0 / m)
    step = StepRegion()
    horizon = n_periods * 2.0 * math.pi * m
    found = []
    for th in np.linspace(-math.pi, math.pi, n_phases, endpoint=False) + math.pi / (3 * n_phases):
        s = initial_state_on_level_set(V1, V2, E1, E2, 0.0, float(th))
        if step.contains(s.q1, s.q2):
            continue
        try:
            _, summ = integrate_with_impacts(s, V1, V2, step, t_max=horizon, periodicity_tol=tol)
        except CornerCollisionError:
            continue
        if summ.is_periodic and (summ.mu, summ.b) not in found:
            found.append((summ.mu, summ.b))
    return sorted(found)
