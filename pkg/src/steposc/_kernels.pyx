# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled impact integrator (4th-order Yoshida steps, bisection event location).

Same algorithm and return convention as ``_kernels_py.integrate_impacts``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()

cdef enum:
    STATUS_OK = 0
    STATUS_CORNER = 1
    STATUS_OUT_OF_TABLE = 2

cdef double _CBRT2 = pow(2.0, 1.0 / 3.0)
cdef double _W1 = 1.0 / (2.0 - _CBRT2)
cdef double _W0 = -_CBRT2 / (2.0 - _CBRT2)
cdef double C0 = 0.5 * _W1
cdef double C1 = 0.5 * (_W0 + _W1)
cdef double D0 = _W1
cdef double D1 = _W0


cdef struct Axis:
    int kind
    double omega2
    double load
    double center
    double *x
    double *c      # (4, n-1) row-major
    int n
    int last
    int out_of_table


cdef inline double _force(Axis *ax, double q) nogil:
    cdef double s, d
    cdef int j, lo, hi, mid, m
    if ax.kind == 0:
        return ax.load - ax.omega2 * q
    s = q - ax.center
    if s < ax.x[0] or s > ax.x[ax.n - 1]:
        ax.out_of_table = 1
        return 0.0
    j = ax.last
    if not (ax.x[j] <= s and s <= ax.x[j + 1]):
        lo = 0
        hi = ax.n - 2
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ax.x[mid] <= s:
                lo = mid
            else:
                hi = mid - 1
        j = lo
        ax.last = j
    d = s - ax.x[j]
    m = ax.n - 1
    return -((3.0 * ax.c[j] * d + 2.0 * ax.c[m + j]) * d + ax.c[2 * m + j])


cdef inline void _step(Axis *ax, double q, double p, double h,
                       double *qo, double *po) nogil:
    q += C0 * h * p
    p += D0 * h * _force(ax, q)
    q += C1 * h * p
    p += D1 * h * _force(ax, q)
    q += C1 * h * p
    p += D0 * h * _force(ax, q)
    q += C0 * h * p
    qo[0] = q
    po[0] = p


cdef double _locate(Axis *ax, double q, double p, double h, int which,
                    double target, double sign) nogil:
    cdef double lo = 0.0, hi = h, mid, qm, pm, val
    cdef double scale = h if h > 1.0 else 1.0
    cdef int it
    for it in range(200):
        mid = 0.5 * (lo + hi)
        _step(ax, q, p, mid, &qm, &pm)
        val = (qm if which == 0 else pm) - target
        if ((val > 0.0) == (sign > 0.0)) and val != 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * scale:
            break
    return hi


cdef void _init_axis(Axis *ax, params, list keep):
    kind, omega, load, center, x, c = params
    ax.kind = int(kind)
    ax.omega2 = float(omega) * float(omega)
    ax.load = float(load)
    ax.center = float(center)
    ax.last = 0
    ax.out_of_table = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ca = np.ascontiguousarray(
        np.asarray(c, dtype=np.float64).reshape(-1))
    keep.append(xa)
    keep.append(ca)
    ax.n = xa.shape[0]
    ax.x = <double *> xa.data if ax.n else NULL
    ax.c = <double *> ca.data if ca.shape[0] else NULL


def integrate_impacts(y0, double t0, params1, params2, double q1w, double q2w,
                      double dt, double t_end, long max_impacts, double corner_tol):
    cdef Axis a1, a2
    cdef list keep = []
    _init_axis(&a1, params1, keep)
    _init_axis(&a2, params2, keep)
    cdef double q1 = y0[0], p1 = y0[1], q2 = y0[2], p2 = y0[3]
    cdef double t = t0, h, n1, m1, n2, m2, tau, best_tau, qq, pp
    cdef int best_code, status = STATUS_OK
    cdef long impacts = 0, nrows = 0, cap = 1024
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((cap, 6))

    out[0, 0] = t; out[0, 1] = q1; out[0, 2] = q2; out[0, 3] = p1; out[0, 4] = p2; out[0, 5] = 0
    nrows = 1
    while t < t_end:
        h = dt if dt < t_end - t else t_end - t
        _step(&a1, q1, p1, h, &n1, &m1)
        _step(&a2, q2, p2, h, &n2, &m2)
        if a1.out_of_table or a2.out_of_table:
            status = STATUS_OUT_OF_TABLE
            break
        best_tau = h + 1.0
        best_code = 0
        if p1 != 0.0 and ((m1 > 0.0) != (p1 > 0.0)):
            tau = _locate(&a1, q1, p1, h, 1, 0.0, p1)
            if tau < best_tau:
                best_tau = tau; best_code = 3
        if p2 != 0.0 and ((m2 > 0.0) != (p2 > 0.0)):
            tau = _locate(&a2, q2, p2, h, 1, 0.0, p2)
            if tau < best_tau:
                best_tau = tau; best_code = 4
        if q1 > q1w and n1 <= q1w:
            tau = _locate(&a1, q1, p1, h, 0, q1w, 1.0)
            if tau < best_tau:
                _step(&a2, q2, p2, tau, &qq, &pp)
                if qq < q2w + corner_tol:
                    best_tau = tau; best_code = 1
        if q2 > q2w and n2 <= q2w:
            tau = _locate(&a2, q2, p2, h, 0, q2w, 1.0)
            if tau < best_tau:
                _step(&a1, q1, p1, tau, &qq, &pp)
                if qq < q1w + corner_tol:
                    best_tau = tau; best_code = 2
        if best_code == 0:
            q1 = n1; p1 = m1; q2 = n2; p2 = m2
            t += h
            continue
        tau = best_tau
        _step(&a1, q1, p1, tau, &q1, &p1)
        _step(&a2, q2, p2, tau, &q2, &p2)
        t += tau
        if best_code == 1:
            if fabs(q2 - q2w) < corner_tol:
                status = STATUS_CORNER
            else:
                q1 = q1w
                p1 = -p1
                impacts += 1
        elif best_code == 2:
            if fabs(q1 - q1w) < corner_tol:
                status = STATUS_CORNER
            else:
                q2 = q2w
                p2 = -p2
                impacts += 1
        elif best_code == 3:
            p1 = 0.0
        else:
            p2 = 0.0
        if nrows == cap:
            cap *= 2
            out = np.resize(out, (cap, 6))
        out[nrows, 0] = t; out[nrows, 1] = q1; out[nrows, 2] = q2
        out[nrows, 3] = p1; out[nrows, 4] = p2; out[nrows, 5] = best_code
        nrows += 1
        if status != STATUS_OK:
            break
        if 0 <= max_impacts <= impacts:
            break
    return out[:nrows].copy(), status
