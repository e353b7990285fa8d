# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel: apply a 1- or 2-qubit Kraus set to a dense density matrix."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF MAX_M = 4


def apply_local_kraus(rho, kraus, targets, int n_qubits):
    cdef double complex[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef double complex[:, :, ::1] ops = np.ascontiguousarray(kraus, dtype=np.complex128)
    cdef int k = len(targets)
    cdef int m = 1 << k
    cdef int d = 1 << n_qubits
    cdef int n_rest = d >> k
    cdef int n_ops = ops.shape[0]
    if ops.shape[1] != m or ops.shape[2] != m:
        raise ValueError("kraus operator shape does not match target count")
    if m > MAX_M:
        raise ValueError("kernel handles at most two target qubits")

    # basis offsets of the target bits, and indices with all target bits clear
    offsets_arr = np.zeros(m, dtype=np.intp)
    bases_arr = np.zeros(n_rest, dtype=np.intp)
    cdef Py_ssize_t[::1] off = offsets_arr
    cdef Py_ssize_t[::1] base = bases_arr
    cdef int a, b, ap, bp, j, idx, cnt
    cdef long tmask = 0
    for a in range(m):
        idx = 0
        for j in range(k):
            if (a >> (k - 1 - j)) & 1:
                idx |= 1 << (n_qubits - 1 - targets[j])
        off[a] = idx
    for j in range(k):
        tmask |= 1 << (n_qubits - 1 - targets[j])
    cnt = 0
    for idx in range(d):
        if idx & tmask == 0:
            base[cnt] = idx
            cnt += 1

    # local superoperator S[a'b', ab] = sum_e E[a', a] conj(E[b', b])
    cdef double complex s[MAX_M * MAX_M][MAX_M * MAX_M]
    cdef int e
    cdef double complex u, v
    for ap in range(m):
        for bp in range(m):
            for a in range(m):
                for b in range(m):
                    u = 0
                    for e in range(n_ops):
                        v = ops[e, bp, b]
                        u = u + ops[e, ap, a] * (v.real - 1j * v.imag)
                    s[ap * m + bp][a * m + b] = u

    out_arr = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex blk[MAX_M * MAX_M]
    cdef double complex acc
    cdef Py_ssize_t x, y, rx, cy
    cdef int mm = m * m, p, q
    with nogil:
        for x in range(n_rest):
            rx = base[x]
            for y in range(n_rest):
                cy = base[y]
                for a in range(m):
                    for b in range(m):
                        blk[a * m + b] = r[rx + off[a], cy + off[b]]
                for p in range(mm):
                    acc = 0
                    for q in range(mm):
                        acc = acc + s[p][q] * blk[q]
                    out[rx + off[p // m], cy + off[p % m]] = acc
    return out_arr
