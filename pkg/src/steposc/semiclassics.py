"""EBK quantization of the periodic families and Weyl counting.

Units: hbar = 1, unit mass.  The resonant ladders are written for
``omega = (1, 1/m)``; a spectrum computed at ``omega = (1, m)`` is the same
ladder multiplied by ``m`` (rescale ``q`` and swap the axes), which is what
:func:`ebk_ladder` does when asked for that presentation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
from scipy import integrate, optimize

from .classical.dynamics import resonant_family
from .classical.geometry import (action_1d, energy_from_action, level_set_geometry,
                                 saturated_wall_angle, wall_action, wall_threshold)
from .errors import DomainError, NoImpactError
from .potentials import PotentialSpec, StepRegion

FAMILY_LABELS = ("single", "I", "II")


@dataclass(frozen=True)
class EbkFamily:
    mu: tuple
    b: tuple
    label: str

    @property
    def maslov_shift(self) -> float:
        """Constant added to n in the quantization condition."""
        return sum(self.mu) / 4.0 + sum(self.b) / 2.0


@dataclass(frozen=True)
class EbkLadder:
    levels: List[tuple]  # (k, E_k)
    family: EbkFamily
    params: tuple  # (omega1, omega2, m)

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for _, e in self.levels])


def families(m: int) -> List[EbkFamily]:
    return [EbkFamily(f.mu, f.b, f.label) for f in resonant_family(m)]


def family(m: int, label: str) -> EbkFamily:
    for f in families(m):
        if f.label == label:
            return f
    raise DomainError(f"no family {label!r} for m={m}")


def ebk_action(E1: float, E2: float, fam: EbkFamily, V1: PotentialSpec, V2: PotentialSpec,
               step: StepRegion = StepRegion(), direct_wall_action: bool = False) -> float:
    """Total action ``sum_i b_i I_i^wall + (mu_i - b_i)/2 I_i`` on the level set (E1, E2)."""
    total = 0.0
    for V, E, qw, mu, b in ((V1, E1, step.q1_wall, fam.mu[0], fam.b[0]),
                            (V2, E2, step.q2_wall, fam.mu[1], fam.b[1])):
        geom = level_set_geometry(V, E, qw)
        if b > 0:
            if not geom.hits_wall:
                raise NoImpactError(f"family needs impacts but E={E} misses the wall")
            total += b * wall_action(geom, direct=direct_wall_action)
        total += 0.5 * (mu - b) * geom.I
    return total


def ebk_level(k: int, m: int, label: str) -> float:
    """Closed-form ladder value for ``omega = (1, 1/m)`` and the step at the origin."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if m <= 0:
        raise DomainError("m must be positive")
    if m % 2:
        if label != "single":
            raise DomainError(f"odd m={m} has only the 'single' family")
        return k / (1.5 * m) + 5.0 * (1 + m) / (6.0 * m)
    if label == "I":
        return k / m + (4.0 * m + 2.0) / (4.0 * m)
    if label == "II":
        return 2.0 * k / m + (m + 3.0) / (2.0 * m)
    raise DomainError(f"even m={m} has families 'I' and 'II', not {label!r}")


def ebk_ladder(m: int, label: str, n_levels: int, presentation: str = "inverse") -> EbkLadder:
    """Ladder of the first ``n_levels`` values.

    ``presentation='inverse'`` is ``omega = (1, 1/m)``; ``'direct'`` gives the
    values for ``omega = (1, m)``, i.e. the inverse ladder times ``m``.
    """
    scale = {"inverse": 1.0, "direct": float(m)}[presentation]
    fam = family(m, label)
    levels = [(k, scale * ebk_level(k, m, label)) for k in range(n_levels)]
    params = (1.0, 1.0 / m) if presentation == "inverse" else (1.0, float(m))
    return EbkLadder(levels, fam, params + (m,))


def solve_ebk(n: int, fam: EbkFamily, V1: PotentialSpec, V2: PotentialSpec,
              step: StepRegion = StepRegion(), split: float = 0.5) -> float:
    """Energy whose action satisfies ``I = n + mu/4 + b/2``.

    The level set is parametrized by ``E1 = V1_min + split (E - V_min)``; for
    the resonant harmonic families with the step at the origin the action is
    independent of the split.
    """
    target = n + fam.maslov_shift
    vmin = V1.v_min + V2.v_min

    def resid(E):
        e1 = V1.v_min + split * (E - vmin)
        return ebk_action(e1, E - e1 + 0.0, fam, V1, V2, step) - target

    hi = vmin + 1.0
    while resid(hi) < 0:
        hi = vmin + 2.0 * (hi - vmin)
    return optimize.brentq(resid, vmin + 1e-12, hi, xtol=1e-15, rtol=1e-15)


def phase_volume(E: float, V1: PotentialSpec, V2: PotentialSpec,
                 step: StepRegion = StepRegion(), rtol: float = 1e-8) -> float:
    """Volume of ``{H <= E}`` outside the step, by iterated quadrature over actions.

    The integrand is ``4 pi^2 - 4 (pi - theta1_wall)(pi - theta2_wall)``, i.e.
    ``-4 th1 th2 + 4 pi (th1 + th2)``, with ``theta_i_wall = pi`` on level sets
    that miss the wall.
    """
    vmin = V1.v_min + V2.v_min
    if E <= vmin:
        return 0.0
    I2_max = action_1d(V2, E - V1.v_min) if E - V1.v_min > V2.v_min else 0.0
    thr1 = wall_threshold(V1, step.q1_wall)
    thr2 = wall_threshold(V2, step.q2_wall)

    def E_of(V, I):
        return energy_from_action(V, I)

    def inner(I2):
        E2 = E_of(V2, I2)
        th2 = saturated_wall_angle(V2, E2, step.q2_wall)
        E1_max = E - E2
        if E1_max <= V1.v_min:
            return 0.0
        I1_max = action_1d(V1, E1_max)
        if th2 >= math.pi:
            return 4.0 * math.pi ** 2 * I1_max

        def f(I1):
            th1 = saturated_wall_angle(V1, E_of(V1, I1), step.q1_wall)
            return -4.0 * th1 * th2 + 4.0 * math.pi * (th1 + th2)

        pts = []
        if V1.v_min < thr1 < E1_max:
            pts.append(action_1d(V1, thr1))
        if pts:
            a = integrate.quad(f, 0.0, pts[0], epsrel=rtol, epsabs=0, limit=200)[0]
            b = integrate.quad(f, pts[0], I1_max, epsrel=rtol, epsabs=0, limit=200)[0]
            return a + b
        return integrate.quad(f, 0.0, I1_max, epsrel=rtol, epsabs=0, limit=200)[0]

    breaks = [0.0]
    if V2.v_min < thr2 < E - V1.v_min:
        breaks.append(action_1d(V2, thr2))
    # the kink of the inner upper limit where E - E2 crosses the axis-1 threshold
    if V1.v_min < thr1 and V2.v_min < E - thr1:
        breaks.append(action_1d(V2, E - thr1))
    breaks = sorted(set(b for b in breaks if 0 <= b < I2_max)) + [I2_max]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += integrate.quad(inner, a, b, epsrel=rtol, epsabs=0, limit=200)[0]
    return total


def harmonic_phase_volume(E: float, V1: PotentialSpec, V2: PotentialSpec,
                          step: StepRegion = StepRegion(), rtol: float = 1e-11) -> float:
    """:func:`phase_volume` for two harmonic terms (any load), by one quadrature.

    With ``u_i = omega_i (q_i - c_i)`` the allowed set is a 4-ball of radius
    ``R = sqrt(2 (E - V_min))``.  The momentum disk over a point ``u`` has
    area ``pi (R^2 - |u|^2)``; integrating that over ``u2 < a2`` is closed
    form and leaves a smooth integral over ``u1 < a1``.
    """
    if not (V1.is_harmonic and V2.is_harmonic):
        raise DomainError("closed-form volume needs harmonic potentials")
    vmin = V1.v_min + V2.v_min
    if E <= vmin:
        return 0.0
    R2 = 2.0 * (E - vmin)
    R = math.sqrt(R2)
    jac = V1.omega * V2.omega
    full = 0.5 * math.pi ** 2 * R2 * R2
    a1 = V1.omega * (step.q1_wall - V1.q_min_location)
    a2 = V2.omega * (step.q2_wall - V2.q_min_location)
    if a1 <= -R or a2 <= -R:
        return full / jac

    def strip(u1):
        s2 = R2 - u1 * u1
        if s2 <= 0.0:
            return 0.0
        s = math.sqrt(s2)
        top = min(a2, s)
        if top <= -s:
            return 0.0
        return math.pi * (s2 * (top + s) - (top ** 3 + s ** 3) / 3.0)

    hi = min(a1, R)
    pts = [x for x in (-math.sqrt(max(R2 - a2 * a2, 0.0)), math.sqrt(max(R2 - a2 * a2, 0.0)))
           if -R < x < hi]
    removed = integrate.quad(strip, -R, hi, points=pts or None, epsrel=rtol, epsabs=1e-15 * full,
                             limit=200)[0]
    return (full - removed) / jac


def weyl_count(E: float, volume: Callable[[float], float]) -> float:
    """Leading Weyl term ``Vol(E) / (2 pi hbar)^2`` with hbar = 1."""
    return max(volume(E), 0.0) / (4.0 * math.pi ** 2)


def volume_function(V1: PotentialSpec, V2: PotentialSpec, step: StepRegion = StepRegion(),
                    rtol: float = 1e-8) -> Callable[[float], float]:
    if V1.is_harmonic and V2.is_harmonic:
        return lambda E: harmonic_phase_volume(E, V1, V2, step)
    return lambda E: phase_volume(E, V1, V2, step, rtol)


def weyl_curve(E_grid: Sequence[float], V1, V2, step=StepRegion()) -> np.ndarray:
    vol = volume_function(V1, V2, step)
    return np.array([weyl_count(E, vol) for E in E_grid])


def inverse_weyl(n: float, volume: Callable[[float], float], E_hi: float) -> float:
    """Energy at which the Weyl count equals ``n``."""
    return optimize.brentq(lambda E: weyl_count(E, volume) - n, 1e-12, E_hi, xtol=1e-13)
