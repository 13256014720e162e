# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the optimizer hot-path kernels.

Objective evaluations inside the multi-start simplex search operate on tiny
matrices (d <= 9), where Python / einsum dispatch overhead dominates; these
loops remove it.  Semantics match `qcorr._kernels_py` exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

cdef double LOG2 = log(2.0)


def cc_joint_probs(cnp.ndarray[cnp.complex128_t, ndim=2] rho,
                   cnp.ndarray[cnp.complex128_t, ndim=3] ms,
                   cnp.ndarray[cnp.complex128_t, ndim=3] ns):
    """Outcome probabilities p_ij = Tr[(M_i (x) N_j) rho]."""
    cdef Py_ssize_t n_a = ms.shape[0], d_a = ms.shape[1]
    cdef Py_ssize_t n_b = ns.shape[0], d_b = ns.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.zeros((n_a, n_b))
    cdef Py_ssize_t i, j, a, b, c, d
    cdef double complex acc, m_ac, row
    for i in range(n_a):
        for j in range(n_b):
            acc = 0
            for a in range(d_a):
                for c in range(d_a):
                    m_ac = ms[i, a, c]
                    if m_ac == 0:
                        continue
                    row = 0
                    for b in range(d_b):
                        for d in range(d_b):
                            # rho[(c,d),(a,b)] with row-major pair index
                            row = row + ns[j, b, d] * rho[c * d_b + d, a * d_b + b]
                    acc = acc + m_ac * row
            p[i, j] = acc.real
    return p


def cq_blocks(cnp.ndarray[cnp.complex128_t, ndim=2] rho,
              cnp.ndarray[cnp.complex128_t, ndim=3] ms):
    """Unnormalized conditional blocks B_i = Tr_A[(M_i (x) I) rho]."""
    cdef Py_ssize_t n_a = ms.shape[0], d_a = ms.shape[1]
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t d_b = d // d_a
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] out = np.zeros(
        (n_a, d_b, d_b), dtype=np.complex128)
    cdef Py_ssize_t i, a, c, b, e
    cdef double complex m_ac
    for i in range(n_a):
        for a in range(d_a):
            for c in range(d_a):
                m_ac = ms[i, a, c]
                if m_ac == 0:
                    continue
                for b in range(d_b):
                    for e in range(d_b):
                        out[i, b, e] = out[i, b, e] + m_ac * rho[c * d_b + b,
                                                                 a * d_b + e]
    return out


def shannon_bits(cnp.ndarray[cnp.float64_t, ndim=1] p):
    """Shannon entropy in bits of a flat nonnegative weight array."""
    cdef Py_ssize_t k, n = p.shape[0]
    cdef double acc = 0.0, x
    for k in range(n):
        x = p[k]
        if x > 0.0:
            acc -= x * log(x)
    return acc / LOG2
