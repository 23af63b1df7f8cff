# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels for small dense complex systems.

Same interface and semantics as ``holosim._kernels_py``.  Step propagators
use scaling-and-squaring with a Taylor polynomial; the scaled norm is kept
below 0.25, where 13 Horner terms reach double precision.  Dimensions are
capped at 8 so all scratch lives on the stack.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, log2, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

DEF MAXD = 8
DEF TAYLOR_TERMS = 13
DEF TARGET_NORM = 0.25

ctypedef double complex cplx


cdef inline void _mat_mul(const cplx* a, const cplx* b, cplx* out, int d) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(d):
        for j in range(d):
            acc = 0
            for k in range(d):
                acc = acc + a[i * d + k] * b[k * d + j]
            out[i * d + j] = acc


cdef inline void _mat_copy(const cplx* src, cplx* dst, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        dst[i] = src[i]


cdef inline double _inf_norm(const cplx* a, int d) noexcept nogil:
    cdef double best = 0.0, row
    cdef int i, j
    cdef cplx v
    for i in range(d):
        row = 0.0
        for j in range(d):
            v = a[i * d + j]
            row += sqrt(v.real * v.real + v.imag * v.imag)
        if row > best:
            best = row
    return best


cdef void _expm_step(const cplx* h, double dt, cplx* out, int d) noexcept nogil:
    """out = exp(-i h dt) via scaled Taylor with repeated squaring."""
    cdef cplx a[MAXD * MAXD]
    cdef cplx term[MAXD * MAXD]
    cdef cplx work[MAXD * MAXD]
    cdef int i, j, k, squarings, n_terms
    cdef int n = d * d
    cdef double norm, scale

    for i in range(n):
        a[i] = (-1j) * dt * h[i]
    norm = _inf_norm(a, d)
    squarings = 0
    if norm > TARGET_NORM:
        squarings = <int>ceil(log2(norm / TARGET_NORM))
        norm = norm * (0.5 ** squarings)
    scale = 1.0
    for i in range(squarings):
        scale *= 0.5
    for i in range(n):
        a[i] = a[i] * scale

    # series length tuned to the scaled norm; residual norm^(N+1)/(N+1)!
    # stays below 2.5e-16 so errors cannot accumulate over ~1e4 steps
    if norm <= 0.01:
        n_terms = 6
    elif norm <= 0.1:
        n_terms = 9
    else:
        n_terms = TAYLOR_TERMS

    # Horner: E = I + A (I + A/2 (I + ... (I + A/N)))
    for i in range(n):
        term[i] = a[i] / <double>n_terms
    for i in range(d):
        term[i * d + i] = term[i * d + i] + 1.0
    for k in range(n_terms - 1, 0, -1):
        _mat_mul(a, term, work, d)
        for i in range(n):
            term[i] = work[i] / <double>k
        for i in range(d):
            term[i * d + i] = term[i * d + i] + 1.0

    for i in range(squarings):
        _mat_mul(term, term, work, d)
        _mat_copy(work, term, n)
    _mat_copy(term, out, n)


def propagate_unitary(cnp.ndarray[cplx, ndim=3] h_mid, cnp.ndarray[double, ndim=1] dts):
    """Ordered product of step propagators exp(-i H_k dt_k), last step leftmost."""
    cdef int n = h_mid.shape[0]
    cdef int d = h_mid.shape[1]
    if d > MAXD:
        raise ValueError(f"dimension {d} exceeds kernel limit {MAXD}")
    cdef cnp.ndarray[cplx, ndim=3] h = np.ascontiguousarray(h_mid)
    cdef cnp.ndarray[double, ndim=1] steps = np.ascontiguousarray(dts)
    cdef cnp.ndarray[cplx, ndim=2] out = np.eye(d, dtype=complex)
    cdef cplx u[MAXD * MAXD]
    cdef cplx step[MAXD * MAXD]
    cdef cplx work[MAXD * MAXD]
    cdef int k, i
    with nogil:
        for i in range(d * d):
            u[i] = 0
        for i in range(d):
            u[i * d + i] = 1
        for k in range(n):
            _expm_step(&h[k, 0, 0], steps[k], step, d)
            _mat_mul(step, u, work, d)
            _mat_copy(work, u, d * d)
    for i in range(d):
        for k in range(d):
            out[i, k] = u[i * d + k]
    return out


def evolve_states(
    cnp.ndarray[cplx, ndim=3] h_mid,
    cnp.ndarray[double, ndim=1] dts,
    cnp.ndarray[cplx, ndim=1] psi0,
    int stride,
):
    """Propagate a state, recording every ``stride``-th step plus endpoints."""
    cdef int n = h_mid.shape[0]
    cdef int d = h_mid.shape[1]
    if d > MAXD:
        raise ValueError(f"dimension {d} exceeds kernel limit {MAXD}")
    cdef int n_rec = 1
    cdef int k
    for k in range(n):
        if (k + 1) % stride == 0 or k == n - 1:
            n_rec += 1
    cdef cnp.ndarray[cplx, ndim=3] h = np.ascontiguousarray(h_mid)
    cdef cnp.ndarray[double, ndim=1] steps = np.ascontiguousarray(dts)
    cdef cnp.ndarray[cplx, ndim=2] out = np.empty((n_rec, d), dtype=complex)
    cdef cplx psi[MAXD]
    cdef cplx nxt[MAXD]
    cdef cplx step[MAXD * MAXD]
    cdef int i, j, rec = 0
    for i in range(d):
        out[0, i] = psi0[i]
        psi[i] = psi0[i]
    rec = 1
    with nogil:
        for k in range(n):
            _expm_step(&h[k, 0, 0], steps[k], step, d)
            for i in range(d):
                nxt[i] = 0
                for j in range(d):
                    nxt[i] = nxt[i] + step[i * d + j] * psi[j]
            for i in range(d):
                psi[i] = nxt[i]
            if (k + 1) % stride == 0 or k == n - 1:
                with gil:
                    for i in range(d):
                        out[rec, i] = psi[i]
                    rec += 1
    return out


cdef void _lindblad_rhs(
    const cplx* h,
    const cplx* rho,
    const cplx* c_ops,
    const cplx* cdc_sum,
    int n_ops,
    cplx* out,
    cplx* w1,
    cplx* w2,
    int d,
) noexcept nogil:
    """out = -i [h, rho] + sum_k (L rho L+ - 0.5 {L+L, rho})."""
    cdef int i, j, k, m
    cdef int n = d * d
    cdef const cplx* c
    cdef cplx acc

    _mat_mul(h, rho, w1, d)
    _mat_mul(rho, h, w2, d)
    for i in range(n):
        out[i] = (-1j) * (w1[i] - w2[i])

    for m in range(n_ops):
        c = c_ops + m * n
        # w1 = L rho, then out += w1 L+
        _mat_mul(c, rho, w1, d)
        for i in range(d):
            for j in range(d):
                acc = 0
                for k in range(d):
                    # (L rho L+)_{ij} = sum_k w1[i,k] conj(L[j,k])
                    acc = acc + w1[i * d + k] * c[j * d + k].conjugate()
                out[i * d + j] = out[i * d + j] + acc

    _mat_mul(cdc_sum, rho, w1, d)
    _mat_mul(rho, cdc_sum, w2, d)
    for i in range(n):
        out[i] = out[i] - 0.5 * (w1[i] + w2[i])


def lindblad_rk4(
    cnp.ndarray[cplx, ndim=3] h_nodes,
    cnp.ndarray[double, ndim=1] dts,
    cnp.ndarray[cplx, ndim=2] rho0,
    cnp.ndarray[cplx, ndim=3] c_ops,
    int stride,
):
    """RK4 for the Lindblad equation; see the pure-python kernel docstring."""
    cdef int n = dts.shape[0]
    cdef int d = rho0.shape[0]
    cdef int n_ops = c_ops.shape[0]
    if d > MAXD:
        raise ValueError(f"dimension {d} exceeds kernel limit {MAXD}")
    cdef int n_rec = 1
    cdef int k
    for k in range(n):
        if (k + 1) % stride == 0 or k == n - 1:
            n_rec += 1

    cdef cnp.ndarray[cplx, ndim=3] h = np.ascontiguousarray(h_nodes)
    cdef cnp.ndarray[double, ndim=1] steps = np.ascontiguousarray(dts)
    cdef cnp.ndarray[cplx, ndim=3] ops = np.ascontiguousarray(c_ops)
    cdef cnp.ndarray[cplx, ndim=2] cdc_arr = np.zeros((d, d), dtype=complex)
    for k in range(n_ops):
        cdc_arr += np.conj(c_ops[k]).T @ c_ops[k]

    cdef cnp.ndarray[cplx, ndim=3] out = np.empty((n_rec, d, d), dtype=complex)
    cdef cplx rho[MAXD * MAXD]
    cdef cplx k1[MAXD * MAXD]
    cdef cplx k2[MAXD * MAXD]
    cdef cplx k3[MAXD * MAXD]
    cdef cplx k4[MAXD * MAXD]
    cdef cplx tmp[MAXD * MAXD]
    cdef cplx w1[MAXD * MAXD]
    cdef cplx w2[MAXD * MAXD]
    cdef const cplx* ops_ptr = NULL
    cdef int i, j, rec
    cdef int nn = d * d
    cdef double dt

    if n_ops > 0:
        ops_ptr = &ops[0, 0, 0]
    for i in range(d):
        for j in range(d):
            out[0, i, j] = rho0[i, j]
            rho[i * d + j] = rho0[i, j]
    rec = 1
    with nogil:
        for k in range(n):
            dt = steps[k]
            _lindblad_rhs(&h[2 * k, 0, 0], rho, ops_ptr, &cdc_arr[0, 0], n_ops, k1, w1, w2, d)
            for i in range(nn):
                tmp[i] = rho[i] + 0.5 * dt * k1[i]
            _lindblad_rhs(&h[2 * k + 1, 0, 0], tmp, ops_ptr, &cdc_arr[0, 0], n_ops, k2, w1, w2, d)
            for i in range(nn):
                tmp[i] = rho[i] + 0.5 * dt * k2[i]
            _lindblad_rhs(&h[2 * k + 1, 0, 0], tmp, ops_ptr, &cdc_arr[0, 0], n_ops, k3, w1, w2, d)
            for i in range(nn):
                tmp[i] = rho[i] + dt * k3[i]
            _lindblad_rhs(&h[2 * k + 2, 0, 0], tmp, ops_ptr, &cdc_arr[0, 0], n_ops, k4, w1, w2, d)
            for i in range(nn):
                rho[i] = rho[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if (k + 1) % stride == 0 or k == n - 1:
                with gil:
                    for i in range(d):
                        for j in range(d):
                            out[rec, i, j] = rho[i * d + j]
                    rec += 1
    return out
