# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) kernels.

Same tableau, step control and status codes as _refkernels; only the inner
loops are C.  State is bounded by 16 dimensions x 16 columns.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, cosh, fabs, pow, sin, sinh, sqrt

cnp.import_array()

BACKEND = "compiled"

cdef enum:
    C_OK = 0
    C_MAX_STEPS = 1
    C_UNDERFLOW = 2
    C_BOUNDARY = 3

STATUS_OK = C_OK
STATUS_MAX_STEPS = C_MAX_STEPS
STATUS_UNDERFLOW = C_UNDERFLOW
STATUS_BOUNDARY = C_BOUNDARY

PATH_LINE = 0
PATH_TRIG = 1
PATH_HYP = 2

cdef double A[7][6]
cdef double B[7]
cdef double E[7]
cdef double C[7]

A[1][0] = 1.0 / 5.0
A[2][0] = 3.0 / 40.0
A[2][1] = 9.0 / 40.0
A[3][0] = 44.0 / 45.0
A[3][1] = -56.0 / 15.0
A[3][2] = 32.0 / 9.0
A[4][0] = 19372.0 / 6561.0
A[4][1] = -25360.0 / 2187.0
A[4][2] = 64448.0 / 6561.0
A[4][3] = -212.0 / 729.0
A[5][0] = 9017.0 / 3168.0
A[5][1] = -355.0 / 33.0
A[5][2] = 46732.0 / 5247.0
A[5][3] = 49.0 / 176.0
A[5][4] = -5103.0 / 18656.0
A[6][0] = 35.0 / 384.0
A[6][1] = 0.0
A[6][2] = 500.0 / 1113.0
A[6][3] = 125.0 / 192.0
A[6][4] = -2187.0 / 6784.0
A[6][5] = 11.0 / 84.0

B[0] = 35.0 / 384.0
B[1] = 0.0
B[2] = 500.0 / 1113.0
B[3] = 125.0 / 192.0
B[4] = -2187.0 / 6784.0
B[5] = 11.0 / 84.0
B[6] = 0.0

E[0] = 71.0 / 57600.0
E[1] = 0.0
E[2] = -71.0 / 16695.0
E[3] = 71.0 / 1920.0
E[4] = -17253.0 / 339200.0
E[5] = 22.0 / 525.0
E[6] = -1.0 / 40.0

C[0] = 0.0
C[1] = 1.0 / 5.0
C[2] = 3.0 / 10.0
C[3] = 4.0 / 5.0
C[4] = 8.0 / 9.0
C[5] = 1.0
C[6] = 1.0


cdef struct Problem:
    int problem          # 0 transport, 1 conformal geodesic
    int kind
    int d
    int ncols
    double lam
    double psi_floor
    double c0[16]
    double c1[16]
    double eps[16]


cdef int _rhs(Problem* pb, double t, double* y, double* dy) noexcept nogil:
    cdef int d = pb.d
    cdef int i, j
    cdef double g[16]
    cdef double dg[16]
    cdef double eg[16]
    cdef double psi, pg, coef, gv, ct, st, xu, qu
    if pb.problem == 0:
        if pb.kind == 0:
            for i in range(d):
                g[i] = pb.c0[i] + t * pb.c1[i]
                dg[i] = pb.c1[i]
        elif pb.kind == 1:
            ct = cos(t)
            st = sin(t)
            for i in range(d):
                g[i] = ct * pb.c0[i] + st * pb.c1[i]
                dg[i] = -st * pb.c0[i] + ct * pb.c1[i]
        else:
            ct = cosh(t)
            st = sinh(t)
            for i in range(d):
                g[i] = ct * pb.c0[i] + st * pb.c1[i]
                dg[i] = st * pb.c0[i] + ct * pb.c1[i]
        psi = pb.lam
        pg = 0.0
        for i in range(d):
            eg[i] = pb.eps[i] * g[i]
            psi += eg[i] * g[i]
            pg += eg[i] * dg[i]
        if fabs(psi) < pb.psi_floor:
            return -1
        coef = 2.0 / psi
        for j in range(pb.ncols):
            gv = 0.0
            for i in range(d):
                gv += eg[i] * y[i * pb.ncols + j]
            for i in range(d):
                dy[i * pb.ncols + j] = coef * (pg * y[i * pb.ncols + j] + dg[i] * gv)
        return 0
    else:
        psi = pb.lam
        xu = 0.0
        qu = 0.0
        for i in range(d):
            psi += pb.eps[i] * y[i] * y[i]
            xu += pb.eps[i] * y[i] * y[d + i]
            qu += pb.eps[i] * y[d + i] * y[d + i]
        if fabs(psi) < pb.psi_floor:
            return -1
        for i in range(d):
            dy[i] = y[d + i]
            dy[d + i] = (8.0 * xu * y[d + i] - 4.0 * qu * y[i]) / psi
        return 0


cdef int _drive(Problem* pb, double t0, double t1, double* y, int n,
                double rtol, double atol, long max_steps,
                double* err_accum, long* nsteps) noexcept nogil:
    cdef double k[7][256]
    cdef double ytmp[256]
    cdef double y5[256]
    cdef double ev[256]
    cdef double t, h, span, direction, err, sc, factor, acc, eacc, maxcomp
    cdef long steps = 0
    cdef int i, s, j
    nsteps[0] = 0
    span = t1 - t0
    if span == 0.0:
        return C_OK
    direction = 1.0 if span > 0 else -1.0
    t = t0
    h = span * 0.01
    if _rhs(pb, t, y, k[0]) != 0:
        return C_BOUNDARY
    while steps < max_steps:
        if direction * (t + h - t1) > 0:
            h = t1 - t
        if fabs(h) < 1e-14 * fabs(span):
            nsteps[0] = steps
            return C_UNDERFLOW
        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    if A[s][j] != 0.0:
                        acc += A[s][j] * k[j][i]
                ytmp[i] = y[i] + h * acc
            if _rhs(pb, t + C[s] * h, ytmp, k[s]) != 0:
                nsteps[0] = steps
                return C_BOUNDARY
        err = 0.0
        maxcomp = 0.0
        for i in range(n):
            acc = 0.0
            eacc = 0.0
            for s in range(7):
                if B[s] != 0.0:
                    acc += B[s] * k[s][i]
                if E[s] != 0.0:
                    eacc += E[s] * k[s][i]
            y5[i] = y[i] + h * acc
            ev[i] = h * eacc
        for i in range(n):
            sc = atol + rtol * fmax2(fabs(y[i]), fabs(y5[i]))
            err += (ev[i] / sc) * (ev[i] / sc)
            if fabs(ev[i]) > maxcomp:
                maxcomp = fabs(ev[i])
        err = sqrt(err / n)
        steps += 1
        if err <= 1.0:
            t = t + h
            for i in range(n):
                y[i] = y5[i]
                k[0][i] = k[6][i]
            err_accum[0] += maxcomp
            if direction * (t - t1) >= 0:
                nsteps[0] = steps
                return C_OK
        factor = 0.9 * pow(err + 1e-300, -0.2)
        if factor < 0.2:
            factor = 0.2
        if factor > 5.0:
            factor = 5.0
        h = h * factor
    nsteps[0] = steps
    return C_MAX_STEPS


cdef inline double fmax2(double a, double b) noexcept nogil:
    return a if a > b else b


def transport_segment(int kind, c0, c1, double t0, double t1, double lam, eps,
                      V0, double rtol=1e-10, double atol=1e-10,
                      long max_steps=10_000_000, double psi_floor=1e-12):
    """See _refkernels.transport_segment; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c0a = np.ascontiguousarray(c0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c1a = np.ascontiguousarray(c1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] epsa = np.ascontiguousarray(eps, dtype=np.float64)
    V0a = np.asarray(V0, dtype=np.float64)
    single = V0a.ndim == 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.ascontiguousarray(
        V0a.reshape(len(c0a), -1))
    cdef int d = c0a.shape[0]
    cdef int ncols = V.shape[1]
    if d > 16 or ncols > 16:
        raise ValueError("compiled kernel supports at most 16 dimensions/columns")
    cdef Problem pb
    pb.problem = 0
    pb.kind = kind
    pb.d = d
    pb.ncols = ncols
    pb.lam = lam
    pb.psi_floor = psi_floor
    cdef int i
    for i in range(d):
        pb.c0[i] = c0a[i]
        pb.c1[i] = c1a[i]
        pb.eps[i] = epsa[i]
    # private working copy; the driver integrates in place
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.array(V.ravel(), dtype=np.float64, copy=True)
    cdef double err_accum = 0.0
    cdef long nsteps = 0
    cdef int status
    with nogil:
        status = _drive(&pb, t0, t1, &y[0], d * ncols, rtol, atol, max_steps,
                        &err_accum, &nsteps)
    Vout = y.reshape(d, ncols)
    return (Vout.ravel() if single else Vout), err_accum, int(nsteps), int(status)


def h_geodesic_sample(x0, v0, double lam, eps, t_grid, double rtol=1e-10,
                      double atol=1e-10, long max_steps=10_000_000,
                      double psi_floor=1e-12):
    """See _refkernels.h_geodesic_sample; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x0a = np.ascontiguousarray(x0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v0a = np.ascontiguousarray(v0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] epsa = np.ascontiguousarray(eps, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tg = np.ascontiguousarray(t_grid, dtype=np.float64)
    cdef int d = x0a.shape[0]
    if d > 16:
        raise ValueError("compiled kernel supports at most 16 dimensions")
    cdef Problem pb
    pb.problem = 1
    pb.kind = 0
    pb.d = d
    pb.ncols = 1
    pb.lam = lam
    pb.psi_floor = psi_floor
    cdef int i
    for i in range(d):
        pb.eps[i] = epsa[i]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((tg.shape[0], 2 * d))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(2 * d)
    for i in range(d):
        y[i] = x0a[i]
        y[d + i] = v0a[i]
    out[0, :] = y
    cdef double err_accum = 0.0, seg_err = 0.0
    cdef long steps_total = 0, seg_steps = 0
    cdef int status = STATUS_OK
    cdef Py_ssize_t row
    for row in range(1, tg.shape[0]):
        seg_err = 0.0
        seg_steps = 0
        with nogil:
            status = _drive(&pb, tg[row - 1], tg[row], &y[0], 2 * d, rtol, atol,
                            max_steps, &seg_err, &seg_steps)
        err_accum += seg_err
        steps_total += seg_steps
        if status != STATUS_OK:
            return out[: row], err_accum, int(steps_total), int(status)
        out[row, :] = y
    return out, err_accum, int(steps_total), int(status)
