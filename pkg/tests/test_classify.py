import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcorr.classify import (
    Kind,
    classical_basis,
    commute_residual,
    is_cc,
    is_cq,
    joint_diagonalize,
    ppt_label,
)
from qcorr.corpus import (
    classically_correlated_bit,
    random_cc,
    random_cq,
    random_pure_entangled,
    separable_non_cq,
    werner_qubit,
)
from qcorr.optimize import haar_unitary
from qcorr.qstate import bell_phi_plus, maximally_mixed


PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


class TestCommuteResidual:
    def test_commuting_family_zero(self, rng):
        u = haar_unitary(3, rng)
        fam = [u @ np.diag(rng.normal(size=3)) @ u.conj().T for _ in range(4)]
        assert commute_residual(fam) <= 1e-12

    def test_pauli_x_z_residual(self):
        # ||[X, Z]||_F = ||2iXZ||_F = 2 sqrt(2)
        assert commute_residual([PAULI_X, PAULI_Z]) == pytest.approx(
            2.0 * np.sqrt(2.0), abs=1e-12
        )


class TestJointDiagonalize:
    def test_diagonalizes_commuting_family(self, rng):
        u = haar_unitary(4, rng)
        fam = [u @ np.diag(rng.normal(size=4)) @ u.conj().T for _ in range(3)]
        basis = joint_diagonalize(fam)
        np.testing.assert_allclose(
            basis.conj().T @ basis, np.eye(4), atol=1e-12
        )
        for op in fam:
            rot = basis.conj().T @ op @ basis
            off = rot - np.diag(np.diag(rot))
            assert np.abs(off).max() <= 1e-10

    def test_single_hermitian_operator(self, rng):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = a + a.conj().T
        basis = joint_diagonalize([h])
        rot = basis.conj().T @ h @ basis
        off = rot - np.diag(np.diag(rot))
        assert np.abs(off).max() <= 1e-10


class TestVerdicts:
    def test_cc_state_detected(self, rng):
        for d in (2, 3):
            v = is_cc(random_cc(d, d, rng))
            assert v.kind is Kind.CC
            assert v.residual <= 1e-8

    def test_cq_state_detected(self, rng):
        for d in (2, 3):
            v = is_cq(random_cq(d, d, rng))
            assert v.kind is Kind.CQ

    def test_qc_orientation(self, rng):
        from qcorr.qstate import permute_subsystems

        rho = permute_subsystems(random_cq(2, 2, rng), (1, 0))
        v = is_cc(rho)
        assert v.kind is Kind.QC

    def test_separable_non_classical_rejected(self, rng):
        v = is_cc(separable_non_cq(2, 2, rng))
        assert v.kind is Kind.NEITHER
        assert v.residual > 1e-8

    def test_bell_state_rejected(self):
        assert is_cc(bell_phi_plus()).kind is Kind.NEITHER

    def test_maximally_mixed_is_cc(self):
        assert is_cc(maximally_mixed((2, 2))).kind is Kind.CC

    def test_classical_bit_pair_is_cc(self):
        v = is_cc(classically_correlated_bit())
        assert v.kind is Kind.CC
        assert v.residual <= 1e-12

    def test_verdict_survives_local_rotation(self, rng):
        from qcorr.channels import apply_local, unitary_channel

        rho = random_cc(2, 2, rng)
        rot = apply_local(unitary_channel(haar_unitary(2, rng)), 0, rho)
        rot = apply_local(unitary_channel(haar_unitary(2, rng)), 1, rot)
        assert is_cc(rot).kind is Kind.CC

    def test_classical_basis_diagonalizes_cc_state(self, rng):
        rho = random_cc(3, 3, rng)
        ba = classical_basis(rho, 0)
        bb = classical_basis(rho, 1)
        rot = np.kron(ba, bb)
        m = rot.conj().T @ rho.matrix @ rot
        off = m - np.diag(np.diag(m))
        assert np.abs(off).max() <= 1e-10


class TestPptLabel:
    def test_bell_is_npt(self):
        assert ppt_label(bell_phi_plus()) == "npt"

    def test_separable_is_ppt(self, rng):
        assert ppt_label(separable_non_cq(2, 2, rng)) == "ppt"

    def test_werner_high_visibility_npt(self):
        assert ppt_label(werner_qubit(0.95)) == "npt"
        assert ppt_label(werner_qubit(0.2)) == "ppt"

    def test_pure_entangled_is_npt(self, rng):
        assert ppt_label(random_pure_entangled(2, 2, rng)) == "npt"


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 9),
       st.sampled_from([2, 3]))
def test_random_cc_always_detected(seed, d):
    rng = np.random.default_rng(seed)
    v = is_cc(random_cc(d, d, rng))
    assert v.kind is Kind.CC


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 9),
       st.sampled_from([2, 3]))
def test_random_cq_never_misses(seed, d):
    rng = np.random.default_rng(seed)
    v = is_cq(random_cq(d, d, rng))
    assert v.kind is Kind.CQ
    assert v.residual <= 1e-8
