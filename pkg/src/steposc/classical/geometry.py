"""Level-set geometry of a one-dimensional oscillator.

Angles follow the convention ``theta = 0`` at the right turning point
``q_max``, increasing with time, so the wall angle of a wall at ``q_wall`` is
the phase advance from ``q_max`` to ``q_wall``.  Actions are normalized,
``I = (1/2 pi) \\oint p dq``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

from scipy import integrate, optimize

from ..errors import NoClassicalMotionError, NoImpactError
from ..potentials import PotentialSpec

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


def _check_energy(V: PotentialSpec, E: float) -> None:
    if not E > V.v_min:
        raise NoClassicalMotionError(
            f"E={E} is not above the potential minimum {V.v_min}")
    if E >= V.v_domain_max:
        raise NoClassicalMotionError(
            f"E={E} exceeds the tabulated range (max V={V.v_domain_max})")


def turning_points(V: PotentialSpec, E: float) -> tuple:
    """Return ``(q_min, q_max)`` with ``V(q_min) = V(q_max) = E``."""
    _check_energy(V, E)
    if V.is_harmonic:
        w2 = V.omega ** 2
        disc = math.sqrt(V.load ** 2 + 2.0 * w2 * E)
        return ((V.load - disc) / w2, (V.load + disc) / w2)
    q0 = V.q_min_location
    lo, hi = V.domain
    f = lambda q: V(q) - E
    return (optimize.brentq(f, lo, q0, xtol=1e-15, rtol=1e-15),
            optimize.brentq(f, q0, hi, xtol=1e-15, rtol=1e-15))


def _half_integral(V, E, q_turn, q_other, power):
    """Integrate ``(2(E-V))**power`` from ``q_other`` to the turning point.

    The substitution ``q = q_turn - s u**2`` (``s`` the side sign) removes the
    square-root endpoint singularity.
    """
    span = q_turn - q_other
    s = math.copysign(1.0, span)
    umax = math.sqrt(abs(span))

    def integrand(u):
        q = q_turn - s * u * u
        kin = 2.0 * (E - V(q))
        if kin <= 0.0:
            return 0.0
        return 2.0 * u * kin ** power

    # tabulated potentials are only C^1 at the knots, which trips the
    # extrapolation diagnostics without spoiling the result
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, umax, **_QUAD_OPTS)
    return val


def action_1d(V: PotentialSpec, E: float) -> float:
    """Normalized action ``I(E)``."""
    _check_energy(V, E)
    if V.is_harmonic:
        return (E - V.v_min) / V.omega
    q_lo, q_hi = turning_points(V, E)
    q0 = V.q_min_location
    total = _half_integral(V, E, q_hi, q0, 0.5) + _half_integral(V, E, q_lo, q0, 0.5)
    return total / math.pi


def frequency_1d(V: PotentialSpec, E: float, rel_step: float = 1e-4) -> float:
    """Frequency ``dE/dI``; centered difference of :func:`action_1d` for tabulated V."""
    _check_energy(V, E)
    if V.is_harmonic:
        return V.omega
    dE = rel_step * (E - V.v_min)
    dI = action_1d(V, E + dE) - action_1d(V, E - dE)
    return 2.0 * dE / dI


def energy_from_action(V: PotentialSpec, I: float) -> float:
    """Invert :func:`action_1d`."""
    if I < 0:
        raise NoClassicalMotionError("negative action")
    if V.is_harmonic:
        return V.v_min + V.omega * I
    if I == 0:
        return V.v_min
    hi = V.v_min + 1.0
    while action_1d(V, hi) < I:
        hi = V.v_min + 2.0 * (hi - V.v_min)
        if hi >= V.v_domain_max:
            raise NoClassicalMotionError("action beyond tabulated range")
    return optimize.brentq(lambda e: action_1d(V, e) - I, V.v_min + 1e-300, hi,
                           xtol=1e-14, rtol=1e-13)


def reaches_wall(V: PotentialSpec, E: float, q_wall: float) -> bool:
    return E > float(V(q_wall))


def wall_angle(V: PotentialSpec, E: float, q_wall: float) -> float:
    """Angle at which the smooth orbit at energy E crosses ``q = q_wall``."""
    _check_energy(V, E)
    if not reaches_wall(V, E, q_wall):
        raise NoImpactError(f"level set E={E} does not reach q_wall={q_wall}")
    if V.is_harmonic:
        q_lo, q_hi = turning_points(V, E)
        amp = 0.5 * (q_hi - q_lo)
        qc = V.q_min_location
        return math.acos(min(1.0, max(-1.0, (q_wall - qc) / amp)))
    omega = frequency_1d(V, E)
    q_lo, q_hi = turning_points(V, E)
    if q_wall >= V.q_min_location:
        return omega * _half_integral(V, E, q_hi, q_wall, -0.5)
    return math.pi - omega * _half_integral(V, E, q_lo, q_wall, -0.5)


def angle_of(V: PotentialSpec, E: float, q: float, p: float) -> float:
    """Angle variable of the phase point ``(q, p)`` on the level set E, in [-pi, pi)."""
    if V.is_harmonic:
        th = math.atan2(-p / V.omega, q - V.q_min_location)
    else:
        q_lo, q_hi = turning_points(V, E)
        q = min(max(q, q_lo), q_hi)
        omega = frequency_1d(V, E)
        if q >= V.q_min_location:
            th = omega * _half_integral(V, E, q_hi, q, -0.5)
        else:
            th = math.pi - omega * _half_integral(V, E, q_lo, q, -0.5)
        if p > 0:
            th = -th
    if th >= math.pi:
        th -= 2.0 * math.pi
    return th


def wall_action_direct(V: PotentialSpec, E: float, q_wall: float) -> float:
    """``(1/2 pi)`` times the loop integral of p over the part ``q >= q_wall``."""
    _check_energy(V, E)
    if not reaches_wall(V, E, q_wall):
        return action_1d(V, E)
    q_lo, q_hi = turning_points(V, E)
    q0 = V.q_min_location
    if q_wall >= q0:
        val = _half_integral(V, E, q_hi, q_wall, 0.5)
    else:
        val = (_half_integral(V, E, q_hi, q0, 0.5) + _half_integral(V, E, q_lo, q0, 0.5)
               - _half_integral(V, E, q_lo, q_wall, 0.5))
    return val / math.pi


@dataclass(frozen=True)
class LevelSetGeometry:
    E: float
    q_min: float
    q_max: float
    I: float
    omega_E: float
    theta_wall: Optional[float]
    I_wall: Optional[float]
    I_wall_direct: Optional[float]
    q_wall: float

    @property
    def hits_wall(self) -> bool:
        return self.theta_wall is not None


def level_set_geometry(V: PotentialSpec, E: float, q_wall: float = 0.0) -> LevelSetGeometry:
    q_lo, q_hi = turning_points(V, E)
    I = action_1d(V, E)
    if reaches_wall(V, E, q_wall):
        th = wall_angle(V, E, q_wall)
        I_wall = I * th / math.pi
        I_direct = wall_action_direct(V, E, q_wall)
    else:
        th = I_wall = I_direct = None
    return LevelSetGeometry(E=E, q_min=q_lo, q_max=q_hi, I=I, omega_E=frequency_1d(V, E),
                            theta_wall=th, I_wall=I_wall, I_wall_direct=I_direct,
                            q_wall=q_wall)


def wall_action(geom: LevelSetGeometry, direct: bool = False) -> float:
    """Action of the impact system on one axis.

    By default the angle-fraction value ``I * theta_wall / pi`` is returned;
    ``direct=True`` returns the truncated loop integral instead.  The two agree
    when ``theta_wall = pi/2``.
    """
    if geom.theta_wall is None:
        raise NoImpactError("level set does not reach the wall")
    return geom.I_wall_direct if direct else geom.I_wall


def saturated_wall_angle(V: PotentialSpec, E: float, q_wall: float) -> float:
    """Wall angle, or ``pi`` when the level set misses the wall."""
    if E <= V.v_min or not reaches_wall(V, E, q_wall):
        return math.pi
    return wall_angle(V, E, q_wall)


def wall_threshold(V: PotentialSpec, q_wall: float) -> float:
    """Smallest partial energy whose level set reaches the wall."""
    return float(V(q_wall))

