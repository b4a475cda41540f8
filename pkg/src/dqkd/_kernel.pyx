# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched run loop; same contract as ``_kernel_py.simulate_runs``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()

# slot and column layout; must agree with dqkd.protocol.Slot / Col
cdef enum:
    S_BOB_BASIS = 0
    S_BOB_VECTOR = 1
    S_MODE = 2
    S_ALICE_BASIS = 3
    S_ALICE_MEASURE = 4
    S_SYMBOL = 5
    S_EVE_BASIS = 6
    S_EVE_FWD = 7
    S_EVE_BWD_BASIS = 8
    S_EVE_BWD = 9
    S_BOB_MEASURE = 10

cdef enum:
    C_MODE = 0
    C_BOB_K = 1
    C_BOB_T = 2
    C_ALICE_BASIS = 3
    C_ALICE_OUTCOME = 4
    C_ENCODED_A = 5
    C_BOB_OUTCOME = 6
    C_DECODED_A = 7
    C_EVE_DECODED = 8
    C_COINCIDENT = 9
    C_DETECTED = 10

NSLOTS = 11
NCOLS = 11
LAYOUT = {"nslots": NSLOTS, "ncols": NCOLS}

ctypedef double complex cplx


cdef inline Py_ssize_t _idx(double u, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i = <Py_ssize_t>(u * n)
    return n - 1 if i >= n else i


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx _conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline Py_ssize_t _sample(const double* probs, Py_ssize_t n, double u) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t j
    for j in range(n - 1):
        acc += probs[j]
        if u < acc:
            return j
    return n - 1


cdef void _measure_vec(const cplx[:, :, ::1] vecs, Py_ssize_t kb, cplx* psi,
                       double* probs, Py_ssize_t d) noexcept nogil:
    # probs[j] = |<v^kb_j|psi>|^2
    cdef Py_ssize_t j, q
    cdef cplx acc
    for j in range(d):
        acc = 0
        for q in range(d):
            acc = acc + _conj(vecs[kb, j, q]) * psi[q]
        probs[j] = _abs2(acc)


cdef void _carrier_overlap(const cplx[:, :, ::1] vecs, Py_ssize_t kb, const cplx* J,
                           cplx* M, double* probs, Py_ssize_t d) noexcept nogil:
    # M[j, e] = sum_b conj(v^kb_j[b]) J[b, e]; probs[j] = sum_e |M[j, e]|^2
    cdef Py_ssize_t j, b, e
    cdef cplx w
    for j in range(d):
        for e in range(d):
            M[j * d + e] = 0
        for b in range(d):
            w = _conj(vecs[kb, j, b])
            for e in range(d):
                M[j * d + e] = M[j * d + e] + w * J[b * d + e]
        probs[j] = 0
        for e in range(d):
            probs[j] += _abs2(M[j * d + e])


cdef void _shift_ancilla(const cplx[:, :, ::1] vecs, const long long[:, ::1] sub,
                         cplx* J, cplx* C, cplx* Cs, Py_ssize_t d, bint inverse) noexcept nogil:
    # to dual coordinates on the carrier, permute ancilla labels, back again
    cdef Py_ssize_t h, b, e, target
    cdef cplx w
    for h in range(d):
        for e in range(d):
            C[h * d + e] = 0
        for b in range(d):
            w = _conj(vecs[1, h, b])
            for e in range(d):
                C[h * d + e] = C[h * d + e] + w * J[b * d + e]
    for h in range(d):
        for e in range(d):
            if inverse:
                target = sub[e, sub[0, h]]
            else:
                target = sub[e, h]
            Cs[h * d + target] = C[h * d + e]
    for b in range(d):
        for e in range(d):
            J[b * d + e] = 0
        for h in range(d):
            w = vecs[1, h, b]
            for e in range(d):
                J[b * d + e] = J[b * d + e] + w * Cs[h * d + e]


def simulate_runs(const double[:, ::1] uniforms, const long long[::1] symbols,
                  const cplx[:, :, ::1] vecs, const long long[:, ::1] sub,
                  const cplx[:, ::1] zphase, double c, int strategy, bint ir_independent):
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t d = vecs.shape[1]
    out_arr = np.full((n, NCOLS), -1, dtype=np.int64)
    cdef long long[:, ::1] out = out_arr

    cdef cplx* psi = <cplx*>malloc(d * sizeof(cplx))
    cdef cplx* J = <cplx*>malloc(d * d * sizeof(cplx))
    cdef cplx* C = <cplx*>malloc(d * d * sizeof(cplx))
    cdef cplx* Cs = <cplx*>malloc(d * d * sizeof(cplx))
    cdef double* probs = <double*>malloc(d * sizeof(double))
    if psi == NULL or J == NULL or C == NULL or Cs == NULL or probs == NULL:
        free(psi); free(J); free(C); free(Cs); free(probs)
        raise MemoryError()

    cdef Py_ssize_t i, q, b, e, h, k, t, kp, tp, kb, hb, a
    cdef Py_ssize_t eve_basis, hf
    cdef bint joint = strategy == 2
    cdef double norm
    cdef cplx zf

    try:
        with nogil:
            for i in range(n):
                k = 1 + _idx(uniforms[i, S_BOB_BASIS], d)
                t = _idx(uniforms[i, S_BOB_VECTOR], d)
                out[i, C_BOB_K] = k
                out[i, C_BOB_T] = t
                eve_basis = -1
                hf = -1

                if joint:
                    for b in range(d):
                        for e in range(d):
                            J[b * d + e] = vecs[k, t, b] if e == 0 else 0
                    _shift_ancilla(vecs, sub, J, C, Cs, d, True)
                else:
                    for q in range(d):
                        psi[q] = vecs[k, t, q]
                    if strategy == 1:
                        eve_basis = 1 + _idx(uniforms[i, S_EVE_BASIS], d)
                        _measure_vec(vecs, eve_basis, psi, probs, d)
                        hf = _sample(probs, d, uniforms[i, S_EVE_FWD])
                        for q in range(d):
                            psi[q] = vecs[eve_basis, hf, q]

                if uniforms[i, S_MODE] < c:
                    out[i, C_MODE] = 0
                    kp = 1 + _idx(uniforms[i, S_ALICE_BASIS], d)
                    if joint:
                        _carrier_overlap(vecs, kp, J, C, probs, d)
                        tp = _sample(probs, d, uniforms[i, S_ALICE_MEASURE])
                        norm = sqrt(probs[tp])
                        for b in range(d):
                            for e in range(d):
                                J[b * d + e] = vecs[kp, tp, b] * (C[tp * d + e] / norm)
                    else:
                        _measure_vec(vecs, kp, psi, probs, d)
                        tp = _sample(probs, d, uniforms[i, S_ALICE_MEASURE])
                        for q in range(d):
                            psi[q] = vecs[kp, tp, q]
                    out[i, C_ALICE_BASIS] = kp
                    out[i, C_ALICE_OUTCOME] = tp
                else:
                    out[i, C_MODE] = 1
                    a = symbols[i] if symbols[i] >= 0 else _idx(uniforms[i, S_SYMBOL], d)
                    if joint:
                        for b in range(d):
                            zf = zphase[a, b]
                            for e in range(d):
                                J[b * d + e] = zf * J[b * d + e]
                    else:
                        for q in range(d):
                            psi[q] = zphase[a, q] * psi[q]
                    out[i, C_ENCODED_A] = a

                if strategy == 1:
                    kb = 1 + _idx(uniforms[i, S_EVE_BWD_BASIS], d) if ir_independent else eve_basis
                    _measure_vec(vecs, kb, psi, probs, d)
                    hb = _sample(probs, d, uniforms[i, S_EVE_BWD])
                    for q in range(d):
                        psi[q] = vecs[kb, hb, q]
                    out[i, C_EVE_DECODED] = sub[hf, hb]
                elif joint:
                    # direct shift, then Eve reads her ancilla in the dual basis
                    _shift_ancilla(vecs, sub, J, C, Cs, d, False)
                    for e in range(d):
                        probs[e] = 0
                        for h in range(d):
                            probs[e] += _abs2(Cs[h * d + e])
                    e = _sample(probs, d, uniforms[i, S_EVE_BWD])
                    norm = sqrt(probs[e])
                    for b in range(d):
                        zf = 0
                        for h in range(d):
                            zf = zf + vecs[1, h, b] * Cs[h * d + e]
                        for q in range(d):
                            J[b * d + q] = 0
                        J[b * d + e] = zf / norm
                    out[i, C_EVE_DECODED] = e

                if joint:
                    _carrier_overlap(vecs, k, J, C, probs, d)
                else:
                    _measure_vec(vecs, k, psi, probs, d)
                b = _sample(probs, d, uniforms[i, S_BOB_MEASURE])
                out[i, C_BOB_OUTCOME] = b

                if out[i, C_MODE] == 1:
                    out[i, C_DECODED_A] = sub[t, b]
                    out[i, C_COINCIDENT] = 0
                    out[i, C_DETECTED] = 0
                else:
                    out[i, C_COINCIDENT] = out[i, C_ALICE_BASIS] == k
                    out[i, C_DETECTED] = out[i, C_COINCIDENT] and (
                        out[i, C_ALICE_OUTCOME] != t or b != out[i, C_ALICE_OUTCOME])
    finally:
        free(psi); free(J); free(C); free(Cs); free(probs)
    return out_arr
