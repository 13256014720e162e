"""Pure-numpy implementations of the optimizer hot-path kernels.

These mirror the Cython versions in ``_ckern.pyx``; `qcorr.backend` picks
whichever is available at import time.
"""

import numpy as np


def cc_joint_probs(rho, ms, ns):
    """Outcome probabilities p_ij = Tr[(M_i (x) N_j) rho].

    rho: (dA*dB, dA*dB) complex; ms: (nA, dA, dA); ns: (nB, dB, dB).
    """
    n_a, d_a, _ = ms.shape
    n_b, d_b, _ = ns.shape
    r = rho.reshape(d_a, d_b, d_a, d_b)
    p = np.einsum("iac,jbd,cdab->ij", ms, ns, r, optimize=True)
    return np.ascontiguousarray(p.real)


def cq_blocks(rho, ms):
    """Unnormalized conditional blocks B_i = Tr_A[(M_i (x) I) rho].

    Returns a (n_a, dB, dB) complex array with Tr B_i = p_i.
    """
    n_a, d_a, _ = ms.shape
    d = rho.shape[0]
    d_b = d // d_a
    r = rho.reshape(d_a, d_b, d_a, d_b)
    return np.ascontiguousarray(np.einsum("iac,cbad->ibd", ms, r, optimize=True))


def shannon_bits(p):
    """Shannon entropy in bits of a flat nonnegative weight array."""
    p = np.asarray(p, dtype=float).reshape(-1)
    nz = p[p > 0.0]
    if nz.size == 0:
        return 0.0
    return float(-(nz * np.log2(nz)).sum())
