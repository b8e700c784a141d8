import numpy as np
import pytest
from scipy import sparse

from fhtrack.lattice import (LatticeSpec, assemble_hamiltonian, build_basis,
                             build_doublon_operator, build_hop_forward)
from fhtrack.groundstate import ground_state
from fhtrack.observables import (commutator_expectations, current_expectation,
                                 current_operator, doublon_occupation,
                                 hop_expectation)

from conftest import T0, random_state


@pytest.fixture(scope="module")
def l10_free_ground():
    spec = LatticeSpec(L=10, n_up=5, n_down=5, t0=T0, u=0.0)
    basis = build_basis(spec)
    k = build_hop_forward(basis, spec)
    d = build_doublon_operator(basis, spec)
    h = assemble_hamiltonian(k, d, spec, 0.0)
    _, psi = ground_state(h)
    return spec, k, d, psi


class TestHopExpectation:
    def test_free_l10_ground_state(self, l10_free_ground):
        _, k, _, psi = l10_free_ground
        he = hop_expectation(psi, k)
        # momentum-space fill: R = 2 sum_filled cos(2 pi m / 10)
        expected = 2 * (1 + 2 * np.cos(np.pi / 5) + 2 * np.cos(2 * np.pi / 5))
        assert he.theta == 0.0
        assert he.R == pytest.approx(expected, abs=1e-8)
        assert he.R == pytest.approx(6.472, abs=5e-4)

    def test_real_state_theta_zero_or_pi(self, k6, rng):
        for _ in range(20):
            psi = random_state(k6.shape[0], rng, real=True)
            he = hop_expectation(psi, k6)
            assert he.theta in (0.0, np.pi) or \
                min(abs(he.theta), abs(abs(he.theta) - np.pi)) < 1e-12

    def test_global_gauge_invariance(self, k6, rng):
        psi = random_state(k6.shape[0], rng)
        he = hop_expectation(psi, k6)
        he_rot = hop_expectation(np.exp(1j * 0.7) * psi, k6)
        assert he_rot.R == pytest.approx(he.R, rel=1e-13)
        assert he_rot.theta == pytest.approx(he.theta, abs=1e-12)


class TestCurrent:
    def test_zero_at_phi_equals_theta(self, k6, spec6, rng):
        psi = random_state(k6.shape[0], rng)
        he = hop_expectation(psi, k6)
        assert current_expectation(psi, k6, spec6, he.theta) == \
            pytest.approx(0.0, abs=1e-12)

    def test_maximum_at_quarter_turn(self, k6, spec6, rng):
        psi = random_state(k6.shape[0], rng)
        he = hop_expectation(psi, k6)
        j = current_expectation(psi, k6, spec6, he.theta - np.pi / 2)
        assert j == pytest.approx(2 * spec6.a * spec6.t0 * he.R, rel=1e-13)

    def test_closed_form_matches_operator(self, k6, spec6, rng):
        for _ in range(10):
            psi = random_state(k6.shape[0], rng)
            phi = rng.uniform(-np.pi, np.pi)
            direct = np.vdot(psi, current_operator(k6, spec6, phi) @ psi).real
            closed = current_expectation(psi, k6, spec6, phi)
            assert closed == pytest.approx(direct, abs=1e-12)

    def test_lattice_constant_override(self, k6, spec6, rng):
        psi = random_state(k6.shape[0], rng)
        j1 = current_expectation(psi, k6, spec6, 0.4)
        j60 = current_expectation(psi, k6, spec6, 0.4, a=60 * spec6.a)
        assert j60 == pytest.approx(60 * j1, rel=1e-13)


class TestDoublon:
    def test_free_l10_ground_state(self, l10_free_ground):
        spec, _, d, psi = l10_free_ground
        # Wick factorization for the Slater determinant: <n_up><n_down> = 1/4
        assert doublon_occupation(psi, d, spec) == pytest.approx(0.25, abs=1e-10)

    def test_spin_polarized_state(self):
        spec = LatticeSpec(L=4, n_up=2, n_down=0, t0=T0)
        basis = build_basis(spec)
        d = build_doublon_operator(basis, spec)
        psi = np.full(basis.dim, 1 / np.sqrt(basis.dim))
        assert doublon_occupation(psi, d, spec) == 0.0


class TestCommutatorExpectations:
    def test_identity_observable(self, k6, d6, spec6, rng):
        psi = random_state(k6.shape[0], rng)
        eye = sparse.identity(k6.shape[0], format="csr")
        r_o, _, b = commutator_expectations(psi, k6, d6, eye, spec6)
        assert r_o == pytest.approx(0.0, abs=1e-12)
        assert b == pytest.approx(0.0, abs=1e-12)

    def test_doublon_observable_has_no_interaction_term(self, k6, d6, spec6, rng):
        psi = random_state(k6.shape[0], rng)
        _, _, b = commutator_expectations(psi, k6, d6, d6, spec6)
        assert b == pytest.approx(0.0, abs=1e-12)

    def test_current_against_dense_commutators(self, k6, d6, spec6, rng):
        # The forward-hop kernel is diagonal in momentum space, hence normal,
        # so [K, J(0)] vanishes identically; the agreement covers B.
        j_op = current_operator(k6, spec6, 0.0)
        k_dense = k6.toarray()
        d_dense = np.diag(d6.diagonal())
        o_dense = j_op.toarray()
        hop_comm = k_dense @ o_dense - o_dense @ k_dense
        int_comm = d_dense @ o_dense - o_dense @ d_dense
        assert np.abs(hop_comm).max() < 1e-12
        for _ in range(5):
            psi = random_state(k6.shape[0], rng)
            r_o, theta_o, b = commutator_expectations(psi, k6, d6, j_op, spec6)
            ref = np.vdot(psi, hop_comm @ psi)
            assert r_o * np.exp(1j * theta_o) == pytest.approx(ref, abs=1e-12)
            b_ref = (1j * spec6.u * np.vdot(psi, int_comm @ psi)).real
            assert b == pytest.approx(b_ref, abs=1e-12)

    def test_random_hermitian_against_dense_commutators(self, k6, d6, spec6, rng):
        n = k6.shape[0]
        raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        o_dense = (raw + raw.conj().T) / 2
        o_op = sparse.csr_matrix(o_dense)
        k_dense = k6.toarray()
        d_dense = np.diag(d6.diagonal())
        hop_comm = k_dense @ o_dense - o_dense @ k_dense
        int_comm = d_dense @ o_dense - o_dense @ d_dense
        for _ in range(5):
            psi = random_state(n, rng)
            r_o, theta_o, b = commutator_expectations(psi, k6, d6, o_op, spec6)
            ref = np.vdot(psi, hop_comm @ psi)
            assert r_o == pytest.approx(abs(ref), rel=1e-11)
            assert r_o * np.exp(1j * theta_o) == pytest.approx(ref, rel=1e-11)
            b_ref = (1j * spec6.u * np.vdot(psi, int_comm @ psi)).real
            assert b == pytest.approx(b_ref, abs=1e-10)

    def test_ehrenfest_drift(self, k6, d6, spec6, rng):
        # d<O>/dt from the commutator pieces must match -i<[O, H]> directly
        j_op = current_operator(k6, spec6, 0.0)
        for _ in range(5):
            psi = random_state(k6.shape[0], rng)
            phi = rng.uniform(-np.pi, np.pi)
            r_o, theta_o, b = commutator_expectations(psi, k6, d6, j_op, spec6)
            drift = 2 * spec6.t0 * r_o * np.sin(theta_o - phi) + b
            h = assemble_hamiltonian(k6, d6, spec6, phi)
            direct = (-1j * (np.vdot(psi, j_op @ (h @ psi))
                             - np.vdot(psi, h @ (j_op @ psi)))).real
            assert drift == pytest.approx(direct, abs=1e-10)

    def test_shape_mismatch_rejected(self, k6, d6, spec6, rng):
        psi = random_state(k6.shape[0], rng)
        small = sparse.identity(10, format="csr")
        with pytest.raises(ValueError):
            commutator_expectations(psi, k6, d6, small, spec6)
