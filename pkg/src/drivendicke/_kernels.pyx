# cython: language_level=3
"""Compiled hot kernels: complex CSR matvecs, the RK error norm, and a
fused Dormand-Prince span stepper.

The adaptive integrator spends essentially all of its time applying the
(linear-combination-of-CSR) generator; ``rk45_span`` keeps the entire
stage loop in C between output points, which matters most for the
laboratory-frame runs that resolve ~10^5 fast oscillation periods.
"""

from libc.math cimport cos, fabs, pow, sin, sqrt

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


@cython.boundscheck(False)
@cython.wraparound(False)
def csr_matvec(cnp.complex128_t[::1] data,
               cnp.int32_t[::1] indices,
               cnp.int32_t[::1] indptr,
               cnp.complex128_t[::1] x,
               cnp.complex128_t[::1] out):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, p
    cdef double complex acc
    for i in range(n):
        acc = 0
        for p in range(indptr[i], indptr[i + 1]):
            acc = acc + data[p] * x[indices[p]]
        out[i] = acc
    return np.asarray(out)


@cython.boundscheck(False)
@cython.wraparound(False)
def lcsr_matvec(coeffs, datas, indices_list, indptrs,
                cnp.complex128_t[::1] x,
                cnp.complex128_t[::1] out):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, p, k
    cdef double complex acc, c
    cdef cnp.complex128_t[::1] data
    cdef cnp.int32_t[::1] indices
    cdef cnp.int32_t[::1] indptr
    for i in range(n):
        out[i] = 0
    for k in range(len(coeffs)):
        c = coeffs[k]
        if c == 0:
            continue
        data = datas[k]
        indices = indices_list[k]
        indptr = indptrs[k]
        for i in range(n):
            acc = 0
            for p in range(indptr[i], indptr[i + 1]):
                acc = acc + data[p] * x[indices[p]]
            out[i] = out[i] + c * acc
    return np.asarray(out)


@cython.boundscheck(False)
@cython.wraparound(False)
def error_norm(cnp.complex128_t[::1] err,
               cnp.complex128_t[::1] y0,
               cnp.complex128_t[::1] y1,
               double rtol, double atol):
    cdef Py_ssize_t n = err.shape[0]
    cdef Py_ssize_t i
    cdef double s = 0.0
    cdef double scale, a0, a1, e
    for i in range(n):
        a0 = abs(y0[i])
        a1 = abs(y1[i])
        scale = atol + rtol * (a0 if a0 > a1 else a1)
        e = abs(err[i]) / scale
        s += e * e
    return (s / n) ** 0.5


cdef inline double _coeff_value(int kind, double amp, double xi, double omega,
                                double phi, double kappa, double t) nogil:
    cdef double s, lorentz
    if kind == 0:
        return amp
    s = sin(omega * t + phi)
    lorentz = sqrt(1.0 - xi * xi * s * s)
    if kind == 1:
        return amp * lorentz
    return amp * lorentz * sin(kappa * cos(omega * t + phi))


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _apply_terms(cnp.int32_t[::1] kinds, double[:, ::1] pars,
                       list datas, list indices_list, list indptrs,
                       double t, cnp.complex128_t[::1] x,
                       cnp.complex128_t[::1] out):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, p, k
    cdef double c
    cdef double complex acc
    cdef cnp.complex128_t[::1] data
    cdef cnp.int32_t[::1] indices
    cdef cnp.int32_t[::1] indptr
    for i in range(n):
        out[i] = 0
    for k in range(kinds.shape[0]):
        c = _coeff_value(kinds[k], pars[k, 0], pars[k, 1], pars[k, 2],
                         pars[k, 3], pars[k, 4], t)
        if c == 0.0:
            continue
        data = datas[k]
        indices = indices_list[k]
        indptr = indptrs[k]
        for i in range(n):
            acc = 0
            for p in range(indptr[i], indptr[i + 1]):
                acc = acc + data[p] * x[indices[p]]
            out[i] = out[i] + c * acc


# Dormand-Prince tableau (flattened rows of the stage matrix)
cdef double[21] _DP_A = [
    1.0 / 5,
    3.0 / 40, 9.0 / 40,
    44.0 / 45, -56.0 / 15, 32.0 / 9,
    19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729,
    9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656,
    35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84,
]
cdef double[6] _DP_C = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0]
cdef double[7] _DP_E = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                        -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


@cython.boundscheck(False)
@cython.wraparound(False)
def rk45_span(cnp.int32_t[::1] kinds, double[:, ::1] pars,
              list datas, list indices_list, list indptrs,
              double t0, double t1, double h0, double rtol, double atol,
              double max_step, cnp.complex128_t[::1] y,
              cnp.complex128_t[:, ::1] k,
              cnp.complex128_t[::1] ytmp,
              cnp.complex128_t[::1] ynew,
              bint f_ready):
    """Advance y from t0 to exactly t1; returns (h_next, n_steps, n_rhs).

    ``k`` is a (7, dim) stage workspace; row 0 must hold the RHS at (t0, y)
    when ``f_ready`` (first-same-as-last reuse), otherwise it is computed.
    On return row 0 holds the RHS at (t1, y).
    """
    cdef Py_ssize_t dim = y.shape[0]
    cdef double t = t0
    cdef double h = h0
    cdef double tiny = 1e-14 * (fabs(t1) + fabs(t0) + 1e-300)
    cdef Py_ssize_t n_steps = 0, n_rhs = 0
    cdef Py_ssize_t i, s, j, arow
    cdef double norm, scale, a0, a1, e, factor, h_step
    cdef double complex acc
    cdef bint clipped

    if not f_ready:
        _apply_terms(kinds, pars, datas, indices_list, indptrs, t, y, k[0])
        n_rhs += 1
    while t < t1 - tiny:
        clipped = False
        if h > max_step:
            h = max_step
        h_step = h
        if t + h_step >= t1:
            h_step = t1 - t
            clipped = True
        if h_step <= tiny:
            raise RuntimeError("step size underflow in RK45 span")
        while True:
            # stages 1..5
            arow = 0
            for s in range(1, 6):
                for i in range(dim):
                    acc = 0
                    for j in range(s):
                        acc = acc + _DP_A[arow + j] * k[j, i]
                    ytmp[i] = y[i] + h_step * acc
                arow += s
                _apply_terms(kinds, pars, datas, indices_list, indptrs,
                             t + _DP_C[s] * h_step, ytmp, k[s])
                n_rhs += 1
            # 5th order solution (B row sits at tableau offset 15..20)
            for i in range(dim):
                acc = 0
                for j in range(6):
                    acc = acc + _DP_A[15 + j] * k[j, i]
                ynew[i] = y[i] + h_step * acc
            _apply_terms(kinds, pars, datas, indices_list, indptrs,
                         t + h_step, ynew, k[6])
            n_rhs += 1
            # embedded error estimate and scaled RMS norm
            norm = 0.0
            for i in range(dim):
                acc = 0
                for j in range(7):
                    acc = acc + _DP_E[j] * k[j, i]
                a0 = abs(y[i])
                a1 = abs(ynew[i])
                scale = atol + rtol * (a0 if a0 > a1 else a1)
                e = abs(h_step * acc) / scale
                norm += e * e
            norm = sqrt(norm / dim)
            if norm <= 1.0:
                factor = 10.0 if norm == 0.0 else 0.9 * pow(norm, -0.2)
                if factor > 10.0:
                    factor = 10.0
                break
            factor = 0.9 * pow(norm, -0.2)
            if factor < 0.2:
                factor = 0.2
            h_step = h_step * factor
            clipped = False
            if h_step <= tiny:
                raise RuntimeError("step size underflow in RK45 span")
        t = t + h_step
        for i in range(dim):
            y[i] = ynew[i]
            k[0, i] = k[6, i]
        n_steps += 1
        if clipped:
            # keep the pre-clip natural step for the next span
            if h_step * factor > h:
                h = h_step * factor
        else:
            h = h_step * factor
    return h, n_steps, n_rhs
