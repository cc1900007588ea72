"""Angle coordinates of the smooth system, the cross-shaped surface and the L fold."""
from __future__ import annotations

import math

import numpy as np

from .. import _kernels_py
from ..kernels import axis_params
from ..potentials import PotentialSpec
from .dynamics import Trajectory
from .geometry import angle_of


def _angles_1d(V: PotentialSpec, q, p):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if V.is_harmonic:
        th = np.arctan2(-p / V.omega, q - V.q_min_location)
        return np.where(th >= math.pi, th - 2 * math.pi, th)
    E = 0.5 * p * p + V(q)
    return np.array([angle_of(V, e, a, b) for e, a, b in zip(E.ravel(), q.ravel(), p.ravel())])


def to_angle_coords(q1, q2, p1, p2, V1: PotentialSpec, V2: PotentialSpec):
    """Map phase points to ``(theta1, theta2)`` in ``[-pi, pi)^2``.

    ``theta_i = 0`` at the maximum of ``q_i``.  Scalars or arrays.
    """
    return _angles_1d(V1, q1, p1), _angles_1d(V2, q2, p2)


def trajectory_angles(traj: Trajectory, V1: PotentialSpec, V2: PotentialSpec):
    return to_angle_coords(traj.q1, traj.q2, traj.p1, traj.p2, V1, V2)


def fold_to_L(theta1, theta2):
    """Fold the cross-shaped surface onto one quadrant: ``(|theta1|, |theta2|)``."""
    return np.abs(theta1), np.abs(theta2)


def in_L_region(x, y, theta1_wall, theta2_wall, tol=1e-10):
    """Membership in ``[0, pi]^2`` minus the square ``(theta1_wall, pi] x (theta2_wall, pi]``."""
    x = np.asarray(x)
    y = np.asarray(y)
    box = (x >= -tol) & (x <= math.pi + tol) & (y >= -tol) & (y <= math.pi + tol)
    if theta1_wall is None or theta2_wall is None:  # a wall out of reach removes the notch
        return box
    notch = (x > theta1_wall + tol) & (y > theta2_wall + tol)
    return box & ~notch


def densify(traj: Trajectory, V1: PotentialSpec, V2: PotentialSpec, dt: float = 0.01) -> Trajectory:
    """Insert ``none`` rows every ``dt`` between recorded events.

    Between two events nothing but the smooth flow acts, so harmonic axes are
    rotated exactly and tabulated ones re-integrated with the kernel step.
    """
    rows = []
    for i in range(len(traj) - 1):
        t0, t1 = traj.t[i], traj.t[i + 1]
        rows.append((t0, traj.q1[i], traj.q2[i], traj.p1[i], traj.p2[i], traj.events[i]))
        ts = np.arange(t0 + dt, t1 - 0.5 * dt, dt)
        if ts.size == 0:
            continue
        cols = []
        for V, q, p in ((V1, traj.q1[i], traj.p1[i]), (V2, traj.q2[i], traj.p2[i])):
            cols.append(_advance(V, q, p, ts - t0))
        for k, s in enumerate(ts):
            rows.append((s, cols[0][0][k], cols[1][0][k], cols[0][1][k], cols[1][1][k], 0))
    j = len(traj) - 1
    rows.append((traj.t[j], traj.q1[j], traj.q2[j], traj.p1[j], traj.p2[j], traj.events[j]))
    return Trajectory.from_rows(rows)


def _advance(V, q, p, taus):
    if V.is_harmonic:
        qc, w = V.q_min_location, V.omega
        u, v = q - qc, p / w
        c, s = np.cos(w * taus), np.sin(w * taus)
        return qc + u * c + v * s, w * (v * c - u * s)
    ax = _kernels_py._Axis(axis_params(V))
    qs, ps = np.empty(len(taus)), np.empty(len(taus))
    prev = 0.0
    for k, tau in enumerate(taus):
        h = tau - prev
        n = max(1, int(math.ceil(h / 1e-3)))
        for _ in range(n):
            q, p = _kernels_py._step(ax, q, p, h / n)
        qs[k], ps[k] = q, p
        prev = tau
    return qs, ps
