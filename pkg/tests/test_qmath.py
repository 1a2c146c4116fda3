"""Unit tests for the dense quantum-state toolbox."""

import numpy as np
import pytest

from vsue import qmath


def rand_density(rng, dim):
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = raw @ raw.conj().T
    return rho / rho.trace().real


class TestPauli:
    def test_identity(self):
        assert np.array_equal(qmath.pauli(0), np.eye(2))

    def test_involution(self):
        for i in range(4):
            assert np.allclose(qmath.pauli(i) @ qmath.pauli(i), np.eye(2))

    def test_product_xz(self):
        # oracle: direct 2x2 multiplication
        sx, sy, sz = qmath.pauli(1), qmath.pauli(2), qmath.pauli(3)
        direct = np.array([[sx[0] @ sz[:, 0], sx[0] @ sz[:, 1]],
                           [sx[1] @ sz[:, 0], sx[1] @ sz[:, 1]]])
        assert np.allclose(sx @ sz, direct)
        assert np.allclose(sx @ sz, -1j * sy)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            qmath.pauli(4)


class TestBasisStates:
    def test_computational(self):
        assert np.allclose(qmath.basis_state(0, 0), [1, 0])
        assert np.allclose(qmath.basis_state(1, 0), [0, 1])

    def test_x_basis(self):
        assert np.allclose(qmath.basis_state(1, 1),
                           np.array([1, -1]) / np.sqrt(2))

    def test_y_basis(self):
        assert np.allclose(qmath.basis_state(0, 2),
                           np.array([1, 1j]) / np.sqrt(2))

    @pytest.mark.parametrize("basis", [0, 1, 2])
    def test_orthonormal(self, basis):
        zero = qmath.basis_state(0, basis)
        one = qmath.basis_state(1, basis)
        assert abs(np.vdot(zero, one)) < 1e-15
        assert np.vdot(zero, zero).real == pytest.approx(1.0)
        assert np.vdot(one, one).real == pytest.approx(1.0)


class TestBellStates:
    def test_phi00(self):
        assert np.allclose(qmath.bell_state(0, 0),
                           np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_phi10(self):
        # sigma_x on the second qubit
        assert np.allclose(qmath.bell_state(1, 0),
                           np.array([0, 1, 1, 0]) / np.sqrt(2))

    def test_orthonormal_and_complete(self):
        states = [qmath.bell_state(u, v) for u in (0, 1) for v in (0, 1)]
        gram = np.array([[np.vdot(s, t) for t in states] for s in states])
        assert np.allclose(gram, np.eye(4), atol=1e-12)
        completeness = sum(qmath.projector(s) for s in states)
        assert np.allclose(completeness, np.eye(4), atol=1e-12)


class TestTensor:
    def test_identity_law(self):
        assert np.allclose(qmath.tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_vector_dim(self):
        v = qmath.tensor(qmath.bell_state(0, 0), qmath.bell_state(0, 0))
        assert v.shape == (16,)

    def test_trace_multiplicative(self):
        rng = np.random.default_rng(11)
        a, b = rand_density(rng, 4), rand_density(rng, 4)
        prod = qmath.tensor(a, b)
        assert prod.trace() == pytest.approx(a.trace() * b.trace())

    def test_size_cap(self):
        with pytest.raises(ValueError):
            qmath.tensor(np.eye(16), np.eye(16))


class TestPartialTrace:
    def test_bell_marginal(self):
        rho = qmath.projector(qmath.bell_state(0, 0))
        reduced = qmath.partial_trace(rho, [2, 2], keep=[0])
        assert np.allclose(reduced, np.eye(2) / 2, atol=1e-12)

    def test_factor_state(self):
        rng = np.random.default_rng(3)
        rho, tau = rand_density(rng, 2), rand_density(rng, 4)
        joint = np.kron(rho, tau)
        assert np.allclose(qmath.partial_trace(joint, [2, 4], keep=[0]),
                           rho * tau.trace(), atol=1e-12)

    def test_trace_preserved_random_16(self):
        rng = np.random.default_rng(4)
        rho = rand_density(rng, 16)
        for keep in ([0], [1, 2], [0, 3], [0, 1, 2, 3]):
            reduced = qmath.partial_trace(rho, [2, 2, 2, 2], keep=keep)
            assert reduced.trace().real == pytest.approx(1.0, abs=1e-12)

    def test_dims_mismatch(self):
        with pytest.raises(ValueError):
            qmath.partial_trace(np.eye(6) / 6, [2, 2], keep=[0])


class TestEig:
    def test_maximally_mixed(self):
        vals, _ = qmath.eig_hermitian(np.eye(2) / 2)
        assert np.allclose(vals, [0.5, 0.5])

    def test_rank_one_projector(self):
        vals, _ = qmath.eig_hermitian(qmath.projector(qmath.bell_state(0, 0)))
        assert np.allclose(vals, [1, 0, 0, 0], atol=1e-12)

    def test_bell_diagonal_spectrum(self):
        # eigenvalues of a state assembled from a known Bell-basis diagonal
        rng = np.random.default_rng(5)
        lam = rng.random(4)
        lam /= lam.sum()
        states = [qmath.bell_state(u, v) for u in (0, 1) for v in (0, 1)]
        rho = sum(l * qmath.projector(s) for l, s in zip(lam, states))
        vals, vecs = qmath.eig_hermitian(rho)
        assert np.allclose(vals, np.sort(lam)[::-1], atol=1e-12)
        recon = (vecs * vals) @ vecs.conj().T
        assert np.max(np.abs(recon - rho)) < 1e-10
        assert np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            qmath.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


class TestEntropy:
    def test_pure_state(self):
        assert qmath.von_neumann_entropy(
            qmath.projector(qmath.basis_state(0, 1))) == pytest.approx(0.0)

    def test_maximally_mixed(self):
        assert qmath.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)

    def test_additive_on_products(self):
        rng = np.random.default_rng(6)
        p, q = rng.random(4), rng.random(4)
        p /= p.sum()
        q /= q.sum()
        joint = np.kron(np.diag(p), np.diag(q)).astype(complex)
        assert qmath.von_neumann_entropy(joint) == pytest.approx(
            qmath.von_neumann_entropy(np.diag(p).astype(complex))
            + qmath.von_neumann_entropy(np.diag(q).astype(complex)), abs=1e-10)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(7)
        rho = rand_density(rng, 4)
        base = qmath.von_neumann_entropy(rho)
        for _ in range(10):
            # random unitary composed from Paulis and basis rotations
            factors = []
            for _ in range(2):
                basis = int(rng.integers(3))
                rot = np.array([qmath.basis_state(0, basis),
                                qmath.basis_state(1, basis)]).T
                factors.append(rot @ qmath.pauli(rng.integers(4)))
            u = np.kron(factors[0], factors[1])
            rotated = u @ rho @ u.conj().T
            assert qmath.von_neumann_entropy(rotated) == pytest.approx(
                base, abs=1e-10)

    def test_bell_half_entropy_is_one_bit(self):
        rho = qmath.projector(qmath.bell_state(0, 0))
        for keep in ([0], [1]):
            half = qmath.partial_trace(rho, [2, 2], keep=keep)
            assert qmath.von_neumann_entropy(half) == pytest.approx(1.0)

    def test_range(self):
        rng = np.random.default_rng(8)
        rho = rand_density(rng, 16)
        s = qmath.von_neumann_entropy(rho)
        assert 0.0 <= s <= 4.0


class TestTraceDistance:
    def test_self_distance_zero(self):
        rng = np.random.default_rng(9)
        rho = rand_density(rng, 4)
        assert qmath.trace_distance(rho, rho) == pytest.approx(0.0)

    def test_orthogonal_pure_states(self):
        a = qmath.projector(qmath.basis_state(0, 0))
        b = qmath.projector(qmath.basis_state(1, 0))
        assert qmath.trace_distance(a, b) == pytest.approx(1.0)

    def test_symmetric(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            a, b = rand_density(rng, 8), rand_density(rng, 8)
            assert qmath.trace_distance(a, b) == pytest.approx(
                qmath.trace_distance(b, a), abs=1e-12)
            assert 0.0 <= qmath.trace_distance(a, b) <= 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            qmath.trace_distance(np.eye(2) / 2, np.eye(4) / 4)


class TestValidators:
    def test_density_matrix_accepts_valid(self):
        rng = np.random.default_rng(12)
        qmath.density_matrix(rand_density(rng, 16))

    def test_rejects_non_hermitian(self):
        bad = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            qmath.density_matrix(bad)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            qmath.density_matrix(np.eye(2, dtype=complex))

    def test_subnormalized_mass(self):
        qmath.density_matrix(np.eye(2, dtype=complex) * 0.25, mass=0.5)

    def test_rejects_negative_eigenvalue(self):
        bad = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError):
            qmath.density_matrix(bad)

    def test_pure_state_norm(self):
        with pytest.raises(ValueError):
            qmath.pure_state(np.array([1.0, 1.0]))
        qmath.pure_state(np.array([1.0, 1.0]), normalized=False)
