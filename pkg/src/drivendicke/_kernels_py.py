"""Pure numpy/scipy implementations of the integrator hot kernels.

Same call signatures as the compiled module ``_kernels``; used when the
extension is unavailable or when forced via DRIVENDICKE_BACKEND=python.
"""

import numpy as np

BACKEND_NAME = "python"


def csr_matvec(data, indices, indptr, x, out):
    """out = A @ x for CSR A (complex)."""
    n = out.shape[0]
    # scipy's C routine via a throwaway wrapper costs an allocation; for the
    # fallback that is acceptable.
    from scipy.sparse import csr_matrix

    a = csr_matrix((data, indices, indptr), shape=(n, x.shape[0]), copy=False)
    out[:] = a.dot(x)
    return out


def lcsr_matvec(coeffs, datas, indices_list, indptrs, x, out):
    """out = sum_k coeffs[k] * (A_k @ x) for a list of CSR matrices."""
    from scipy.sparse import csr_matrix

    n = out.shape[0]
    out[:] = 0.0
    for c, d, idx, ptr in zip(coeffs, datas, indices_list, indptrs):
        if c == 0.0:
            continue
        a = csr_matrix((d, idx, ptr), shape=(n, x.shape[0]), copy=False)
        out += c * a.dot(x)
    return out


def error_norm(err, y0, y1, rtol, atol):
    """Scaled RMS norm used by the embedded RK error control."""
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))


def _coeff_value(kind, amp, xi, omega, phi, kappa, t):
    if kind == 0:
        return amp
    s = np.sin(omega * t + phi)
    lorentz = np.sqrt(1.0 - xi * xi * s * s)
    if kind == 1:
        return amp * lorentz
    return amp * lorentz * np.sin(kappa * np.cos(omega * t + phi))


_DP_A = [
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                  -17253 / 339200, 22 / 525, -1 / 40])


def rk45_span(kinds, pars, datas, indices_list, indptrs, t0, t1, h0,
              rtol, atol, max_step, y, k, ytmp, ynew, f_ready):
    """Pure-python mirror of the compiled span stepper (same contract)."""
    from scipy.sparse import csr_matrix

    dim = y.shape[0]
    mats = [csr_matrix((d, idx, ptr), shape=(dim, dim), copy=False)
            for d, idx, ptr in zip(datas, indices_list, indptrs)]

    def apply_terms(t, x, out):
        out[:] = 0.0
        for kk, pp, m in zip(kinds, pars, mats):
            c = _coeff_value(int(kk), *pp, t)
            if c != 0.0:
                out += c * m.dot(x)
        return out

    t = float(t0)
    h = float(h0)
    tiny = 1e-14 * (abs(t1) + abs(t0) + 1e-300)
    n_steps = n_rhs = 0
    if not f_ready:
        apply_terms(t, y, k[0])
        n_rhs += 1
    while t < t1 - tiny:
        clipped = False
        h = min(h, max_step)
        h_step = h
        if t + h_step >= t1:
            h_step = t1 - t
            clipped = True
        if h_step <= tiny:
            raise RuntimeError("step size underflow in RK45 span")
        while True:
            for s in range(1, 6):
                ytmp[:] = y + h_step * (_DP_A[s - 1][None, :] @ k[:s]).reshape(dim)
                apply_terms(t + _DP_C[s] * h_step, ytmp, k[s])
                n_rhs += 1
            ynew[:] = y + h_step * (_DP_B[None, :] @ k[:6]).reshape(dim)
            apply_terms(t + h_step, ynew, k[6])
            n_rhs += 1
            err = h_step * (_DP_E[None, :] @ k).reshape(dim)
            norm = error_norm(err, y, ynew, rtol, atol)
            if norm <= 1.0:
                factor = 10.0 if norm == 0.0 else min(10.0, 0.9 * norm ** -0.2)
                break
            h_step *= max(0.2, 0.9 * norm ** -0.2)
            clipped = False
            if h_step <= tiny:
                raise RuntimeError("step size underflow in RK45 span")
        t += h_step
        y[:] = ynew
        k[0][:] = k[6]
        n_steps += 1
        if clipped:
            h = max(h, h_step * factor)
        else:
            h = h_step * factor
    return h, n_steps, n_rhs
