"""Structural detection of classical-classical / classical-quantum states.

A bipartite state is classical on side A exactly when its A-conditional
operators (the Hermitian combinations of the blocks <m|_B rho |n>_B) form a
commuting family.  Degenerate marginals are handled uniformly by jointly
diagonalizing that family with a Jacobi-style sweep; the common eigenbasis
is the claimed classical basis and the verdict is judged by the residual
off-diagonal mass of the rotated state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qstate import TAU_PSD, DensityMatrix, StateError, partial_transpose

TAU_CLASS = 1e-8


class Kind(Enum):
    CC = "CC"
    CQ = "CQ"
    QC = "QC"
    NEITHER = "neither"


@dataclass(frozen=True)
class ClassicalityVerdict:
    kind: Kind
    basis_A: np.ndarray | None
    basis_B: np.ndarray | None
    residual: float

    def to_dict(self) -> dict:
        def basis_list(b):
            if b is None:
                return None
            return [[float(z.real), float(z.imag)] for z in b.reshape(-1)]
        return {
            "kind": self.kind.value,
            "basis_A": basis_list(self.basis_A),
            "basis_B": basis_list(self.basis_B),
            "residual": self.residual,
        }


def commute_residual(ops) -> float:
    """Max Frobenius norm of pairwise commutators."""
    ops = [np.asarray(o, dtype=complex) for o in ops]
    d = ops[0].shape[0]
    for o in ops:
        if o.shape != (d, d):
            raise StateError("operators must share one dimension")
    worst = 0.0
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            c = ops[i] @ ops[j] - ops[j] @ ops[i]
            worst = max(worst, float(np.linalg.norm(c)))
    return worst


def joint_diagonalize(ops, tol: float = 1e-14,
                      max_sweeps: int = 100) -> np.ndarray:
    """Unitary J approximately diagonalizing a family of Hermitian matrices.

    Jacobi sweeps over index pairs; each rotation maximizes the diagonal
    mass of the pair across the whole family (Cardoso-Souloumiac update,
    specialized to Hermitian inputs).
    """
    ops = [np.array(o, dtype=complex) for o in ops]
    d = ops[0].shape[0]
    u = np.eye(d, dtype=complex)
    if d == 1:
        return u
    for _ in range(max_sweeps):
        changed = False
        for p in range(d):
            for q in range(p + 1, d):
                # 3x3 real surrogate built from the (p, q) entries.
                g = np.zeros((3, 3))
                for a in ops:
                    h = np.array([
                        a[p, p].real - a[q, q].real,
                        (a[p, q] + a[q, p]).real,
                        (1j * (a[q, p] - a[p, q])).real,
                    ])
                    g += np.outer(h, h)
                evals, evecs = np.linalg.eigh(g)
                x, y, z = evecs[:, -1]
                if x < 0:
                    x, y, z = -x, -y, -z
                r = np.sqrt(x * x + y * y + z * z)
                if r <= 0 or y * y + z * z == 0.0:
                    continue
                c = np.sqrt((x + r) / (2 * r))
                s = (y - 1j * z) / np.sqrt(2 * r * (x + r))
                if abs(s) <= tol:
                    continue
                changed = True
                rot = np.eye(d, dtype=complex)
                rot[p, p] = c
                rot[p, q] = -np.conj(s)
                rot[q, p] = s
                rot[q, q] = c
                for k in range(len(ops)):
                    ops[k] = rot.conj().T @ ops[k] @ rot
                u = u @ rot
        if not changed:
            break
    return u


def _conditional_family(rho: DensityMatrix, side: int):
    """Hermitian A-side (side=0) or B-side (side=1) conditional operators."""
    if rho.layout.n_subsystems != 2:
        raise StateError("classification requires a bipartite layout")
    d_a, d_b = rho.dims
    r = rho.matrix.reshape(d_a, d_b, d_a, d_b)
    if side == 0:
        d_cond, d_reg = d_a, d_b
        block = lambda m, n: r[:, m, :, n]
    elif side == 1:
        d_cond, d_reg = d_b, d_a
        block = lambda m, n: r[m, :, n, :]
    else:
        raise StateError(f"side must be 0 or 1, got {side}")
    fam = []
    for m in range(d_reg):
        fam.append(np.array(block(m, m)))
        for n in range(m + 1, d_reg):
            t = np.array(block(m, n))
            fam.append(t + t.conj().T)
            fam.append(1j * (t - t.conj().T))
    return fam, d_cond


def _block_residual(rho: DensityMatrix, basis: np.ndarray, side: int) -> float:
    """Max coherence between distinct basis states of the measured side."""
    d_a, d_b = rho.dims
    if side == 0:
        rot = np.kron(basis, np.eye(d_b, dtype=complex))
    else:
        rot = np.kron(np.eye(d_a, dtype=complex), basis)
    m = rot.conj().T @ rho.matrix @ rot
    r = m.reshape(d_a, d_b, d_a, d_b)
    worst = 0.0
    d_c = d_a if side == 0 else d_b
    for i in range(d_c):
        for j in range(d_c):
            if i == j:
                continue
            blk = r[i, :, j, :] if side == 0 else r[:, i, :, j]
            worst = max(worst, float(np.abs(blk).max()))
    return worst


def _product_residual(rho: DensityMatrix, basis_a: np.ndarray,
                      basis_b: np.ndarray) -> float:
    rot = np.kron(basis_a, basis_b)
    m = rot.conj().T @ rho.matrix @ rot
    off = m - np.diag(np.diag(m))
    return float(np.abs(off).max())


def classical_basis(rho: DensityMatrix, side: int) -> np.ndarray:
    """Candidate local basis making the given side classical."""
    fam, _ = _conditional_family(rho, side)
    return joint_diagonalize(fam)


def is_cq(rho: DensityMatrix, tol: float = TAU_CLASS,
          side: int = 0) -> ClassicalityVerdict:
    """One-sided classicality test; kind is CQ for side 0, QC for side 1."""
    basis = classical_basis(rho, side)
    residual = _block_residual(rho, basis, side)
    if residual <= tol:
        kind = Kind.CQ if side == 0 else Kind.QC
        if side == 0:
            return ClassicalityVerdict(kind, basis, None, residual)
        return ClassicalityVerdict(kind, None, basis, residual)
    return ClassicalityVerdict(Kind.NEITHER, None, None, residual)


def is_cc(rho: DensityMatrix, tol: float = TAU_CLASS) -> ClassicalityVerdict:
    """Two-sided classicality test.

    kind is CC when both sides diagonalize, CQ/QC when only one does, and
    neither otherwise.  For CC the residual is the max off-diagonal of the
    state rotated into the claimed product basis.
    """
    basis_a = classical_basis(rho, 0)
    basis_b = classical_basis(rho, 1)
    res_a = _block_residual(rho, basis_a, 0)
    res_b = _block_residual(rho, basis_b, 1)
    if res_a <= tol and res_b <= tol:
        residual = _product_residual(rho, basis_a, basis_b)
        if residual <= tol:
            return ClassicalityVerdict(Kind.CC, basis_a, basis_b, residual)
    if res_a <= tol:
        return ClassicalityVerdict(Kind.CQ, basis_a, None, res_a)
    if res_b <= tol:
        return ClassicalityVerdict(Kind.QC, None, basis_b, res_b)
    return ClassicalityVerdict(Kind.NEITHER, None, None, min(res_a, res_b))


def ppt_label(rho: DensityMatrix) -> str:
    """'ppt' when the partial transpose is PSD, else 'npt'."""
    if rho.layout.n_subsystems != 2:
        raise StateError("PPT label requires a bipartite layout")
    pt = partial_transpose(rho, (1,))
    return "ppt" if np.linalg.eigvalsh(pt).min() >= -TAU_PSD else "npt"
