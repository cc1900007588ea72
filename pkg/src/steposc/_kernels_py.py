"""Pure-Python version of the impact integrator kernel.

Mirrors ``_kernels.pyx`` line for line; used when the extension is not built
or ``STEPOSC_PURE_PYTHON`` is set.
"""

import numpy as np

STATUS_OK = 0
STATUS_CORNER = 1
STATUS_OUT_OF_TABLE = 2

_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)
_C = (0.5 * _W1, 0.5 * (_W0 + _W1), 0.5 * (_W0 + _W1), 0.5 * _W1)
_D = (_W1, _W0, _W1)


class _Axis:
    __slots__ = ("kind", "omega2", "load", "center", "x", "c", "n", "last")

    def __init__(self, params):
        kind, omega, load, center, x, c = params
        self.kind = int(kind)
        self.omega2 = omega * omega
        self.load = load
        self.center = center
        self.x = [float(v) for v in x]
        self.c = [list(map(float, row)) for row in np.asarray(c).T] if len(x) else []
        self.n = len(self.x)
        self.last = 0

    def force(self, q):
        if self.kind == 0:
            return self.load - self.omega2 * q
        s = q - self.center
        x = self.x
        if s < x[0] or s > x[-1]:
            raise OverflowError
        j = self.last
        if not (x[j] <= s <= x[j + 1]):
            lo, hi = 0, self.n - 2
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if x[mid] <= s:
                    lo = mid
                else:
                    hi = mid - 1
            j = lo
            self.last = j
        d = s - x[j]
        c0, c1, c2, _ = self.c[j]
        return -((3.0 * c0 * d + 2.0 * c1) * d + c2)


def _step(ax, q, p, h):
    """One 4th-order Yoshida step of size h for a single axis."""
    for i in range(3):
        q += _C[i] * h * p
        p += _D[i] * h * ax.force(q)
    q += _C[3] * h * p
    return q, p


def _locate(ax, q, p, h, which, target, sign):
    """Bisect the sub-step length at which ``state[which] - target`` changes sign.

    ``sign`` is the sign of the function at the start of the step.
    """
    lo, hi = 0.0, h
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        qm, pm = _step(ax, q, p, mid)
        val = (qm if which == 0 else pm) - target
        if (val > 0.0) == (sign > 0.0) and val != 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, h):
            break
    return hi


def integrate_impacts(y0, t0, params1, params2, q1w, q2w, dt, t_end, max_impacts, corner_tol):
    """Integrate the impact system; returns ``(rows, status)``.

    ``y0`` is ``(q1, p1, q2, p2)``.  Rows are ``(t, q1, q2, p1, p2, code)``
    with codes 0 start, 1/2 impact on wall 1/2, 3/4 turning point on axis 1/2.
    """
    a1, a2 = _Axis(params1), _Axis(params2)
    q1, p1, q2, p2 = (float(v) for v in y0)
    t = float(t0)
    rows = [(t, q1, q2, p1, p2, 0)]
    impacts = 0
    try:
        while t < t_end:
            h = min(dt, t_end - t)
            n1, m1 = _step(a1, q1, p1, h)
            n2, m2 = _step(a2, q2, p2, h)
            best_tau, best_code = h + 1.0, 0
            if p1 != 0.0 and (m1 > 0.0) != (p1 > 0.0):
                tau = _locate(a1, q1, p1, h, 1, 0.0, p1)
                if tau < best_tau:
                    best_tau, best_code = tau, 3
            if p2 != 0.0 and (m2 > 0.0) != (p2 > 0.0):
                tau = _locate(a2, q2, p2, h, 1, 0.0, p2)
                if tau < best_tau:
                    best_tau, best_code = tau, 4
            if q1 > q1w and n1 <= q1w:
                tau = _locate(a1, q1, p1, h, 0, q1w, 1.0)
                if tau < best_tau:
                    qq, _ = _step(a2, q2, p2, tau)
                    if qq < q2w + corner_tol:
                        best_tau, best_code = tau, 1
            if q2 > q2w and n2 <= q2w:
                tau = _locate(a2, q2, p2, h, 0, q2w, 1.0)
                if tau < best_tau:
                    qq, _ = _step(a1, q1, p1, tau)
                    if qq < q1w + corner_tol:
                        best_tau, best_code = tau, 2
            if best_code == 0:
                q1, p1, q2, p2 = n1, m1, n2, m2
                t += h
                continue
            tau = best_tau
            q1, p1 = _step(a1, q1, p1, tau)
            q2, p2 = _step(a2, q2, p2, tau)
            t += tau
            if best_code == 1:
                if abs(q2 - q2w) < corner_tol:
                    rows.append((t, q1, q2, p1, p2, 1))
                    return rows, STATUS_CORNER
                q1 = q1w
                p1 = -p1
                impacts += 1
            elif best_code == 2:
                if abs(q1 - q1w) < corner_tol:
                    rows.append((t, q1, q2, p1, p2, 2))
                    return rows, STATUS_CORNER
                q2 = q2w
                p2 = -p2
                impacts += 1
            elif best_code == 3:
                p1 = 0.0
            else:
                p2 = 0.0
            rows.append((t, q1, q2, p1, p2, best_code))
            if 0 <= max_impacts <= impacts:
                break
    except OverflowError:
        return rows, STATUS_OUT_OF_TABLE
    return rows, STATUS_OK
