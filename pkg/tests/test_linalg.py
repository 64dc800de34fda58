import numpy as np
import pytest

from unitfold.linalg import (PAULI_X, PAULI_Y, PAULI_Z, CharPolyCoeffs,
                             LinalgError, char_poly_coeffs, eig_unitary,
                             expm_hermitian, haar_random, is_hermitian,
                             is_unitary, kron, logm_unitary, multiply,
                             random_hermitian)

from oracles import char_poly_newton

I2 = np.eye(2, dtype=complex)


class TestMultiplyKron:
    def test_identity_product(self):
        assert np.allclose(multiply(I2, I2), I2)

    def test_pauli_involution(self):
        assert np.allclose(multiply(PAULI_X, PAULI_X), I2)

    def test_adjoint_of_product(self):
        a, b = haar_random(8, 1), haar_random(8, 2)
        assert np.allclose(multiply(a, b).conj().T,
                           multiply(b.conj().T, a.conj().T), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(LinalgError):
            multiply(I2, np.eye(4))

    def test_kron_identity(self):
        assert np.allclose(kron(I2, I2), np.eye(4))

    def test_kron_basis_ordering(self):
        # sigma_x on the first factor swaps the two 2-blocks
        m = kron(PAULI_X, I2)
        expected = np.zeros((4, 4))
        expected[0, 2] = expected[1, 3] = expected[2, 0] = expected[3, 1] = 1
        assert np.allclose(m, expected)

    def test_kron_mixed_product(self):
        a, b = haar_random(2, 3), haar_random(2, 4)
        c, d = haar_random(2, 5), haar_random(2, 6)
        assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)

    def test_unitarity_preserved_up_to_dim_32(self):
        for dim in (4, 8, 16, 32):
            u = multiply(haar_random(dim, 10 + dim), haar_random(dim, 20 + dim))
            assert is_unitary(u, 1e-10)
        assert is_unitary(kron(haar_random(8, 1), haar_random(4, 2)), 1e-10)


class TestEigUnitary:
    def test_diag_phases(self):
        phases, _ = eig_unitary(np.diag([1, -1]).astype(complex))
        assert np.allclose(sorted(phases), [0, np.pi])

    def test_identity_phases(self):
        phases, _ = eig_unitary(np.eye(8, dtype=complex))
        assert np.allclose(phases, 0)

    def test_haar_round_trip(self):
        for seed in range(5):
            u = haar_random(16, seed)
            phases, v = eig_unitary(u)
            rebuilt = (v * np.exp(1j * phases)) @ v.conj().T
            assert np.linalg.norm(rebuilt - u) <= 1e-9
            assert is_unitary(v, 1e-9)
            assert np.all(phases > -np.pi) and np.all(phases <= np.pi)

    def test_rejects_non_unitary(self):
        with pytest.raises(LinalgError):
            eig_unitary(np.ones((3, 3)))


class TestExpmLogm:
    def test_expm_zero(self):
        assert np.allclose(expm_hermitian(np.zeros((4, 4)), 1.0), np.eye(4))

    def test_expm_pauli_closed_form(self):
        assert np.allclose(expm_hermitian(PAULI_X, np.pi / 2), 1j * PAULI_X)

    def test_group_property(self):
        h = random_hermitian(8, 1.0, 11)
        lhs = expm_hermitian(h, 0.3) @ expm_hermitian(h, 0.4)
        assert np.linalg.norm(lhs - expm_hermitian(h, 0.7)) <= 1e-9

    def test_logm_identity(self):
        assert np.allclose(logm_unitary(np.eye(4, dtype=complex)), 0)

    def test_logm_closed_form(self):
        h = logm_unitary(np.diag([1j, -1j]))
        assert np.allclose(h, np.diag([np.pi / 2, -np.pi / 2]), atol=1e-12)

    def test_round_trip_haar(self):
        for seed in range(100):
            u = haar_random(8, seed)
            h = logm_unitary(u)
            assert is_hermitian(h, 1e-10)
            w = np.linalg.eigvalsh(h)
            assert np.all(w > -np.pi - 1e-12) and np.all(w <= np.pi + 1e-12)
            assert np.linalg.norm(expm_hermitian(h, 1.0) - u) <= 1e-9

    def test_logm_expm_identity_on_hermitian(self):
        h = random_hermitian(8, 2.0, 3)  # spectrum inside (-pi, pi)
        assert np.linalg.norm(logm_unitary(expm_hermitian(h, 1.0)) - h) <= 1e-9

    def test_branch_convention_minus_one(self):
        h = logm_unitary(np.diag([-1.0 + 0j, 1.0]))
        assert np.allclose(np.linalg.eigvalsh(h), [0.0, np.pi], atol=1e-9)

    def test_expm_rejects_non_hermitian(self):
        with pytest.raises(LinalgError):
            expm_hermitian(np.diag([1j, 0]), 1.0)


class TestCharPoly:
    def test_identity_2(self):
        c = char_poly_coeffs(I2)
        assert np.isclose(c.lambdas[0], -2)
        assert np.isclose(c.constant, 1)

    def test_diag_pm_one(self):
        c = char_poly_coeffs(np.diag([1.0, -1.0]).astype(complex))
        assert np.isclose(c.lambdas[0], 0)
        assert np.isclose(c.constant, -1)

    def test_coefficient_accessor(self):
        c = char_poly_coeffs(I2)
        assert c.coefficient(2) == 1
        assert np.isclose(c.coefficient(1), -2)
        assert np.isclose(c.coefficient(0), 1)

    def test_unit_modulus_constant(self):
        for seed in range(10):
            c = char_poly_coeffs(haar_random(16, seed))
            assert abs(abs(c.constant) - 1) <= 1e-9

    def test_newton_identities_oracle(self):
        # two independent algorithms, 100 random unitaries up to dim 32
        rng = np.random.default_rng(0)
        for trial in range(100):
            dim = int(rng.choice([2, 4, 8, 16, 32]))
            u = haar_random(dim, 1000 + trial)
            ours = char_poly_coeffs(u)
            oracle = char_poly_newton(u)
            assert abs(ours.constant - oracle[dim]) <= 1e-8
            for power in range(1, dim):
                assert abs(ours.coefficient(power) - oracle[dim - power]) <= 1e-8

    def test_reconstruction_roots(self):
        u = haar_random(8, 5)
        c = char_poly_coeffs(u)
        poly = np.concatenate(([1.0 + 0j], [c.coefficient(p) for p in range(7, -1, -1)]))
        mu = np.linalg.eigvals(u)
        values = np.polyval(poly, mu)
        assert np.max(np.abs(values)) <= 1e-8

    def test_rejects_dim_1(self):
        with pytest.raises(LinalgError):
            char_poly_coeffs(np.array([[1.0]]))


class TestRandomSampling:
    def test_haar_unitary(self):
        for seed in (0, 1, 99):
            u = haar_random(8, seed)
            assert np.linalg.norm(u.conj().T @ u - np.eye(8)) <= 1e-12

    def test_haar_deterministic(self):
        assert np.array_equal(haar_random(8, 7), haar_random(8, 7))
        assert not np.allclose(haar_random(8, 7), haar_random(8, 8))

    def test_haar_mean_distance_to_identity(self):
        # Haar targets sit far from identity: mean D approx 1
        from unitfold.objective import distance
        d = [distance(haar_random(8, s), np.eye(8)) for s in range(1000)]
        assert abs(np.mean(d) - 1.0) <= 0.05

    def test_random_hermitian_norm_and_symmetry(self):
        h = random_hermitian(8, 0.1, 3)
        assert np.array_equal(h, h.conj().T)
        assert abs(np.linalg.norm(h, 2) - 0.1) <= 1e-12

    def test_random_hermitian_distance_sweep(self):
        from unitfold.objective import distance
        dists = [distance(expm_hermitian(random_hermitian(8, norm, 5), 1.0), np.eye(8))
                 for norm in (0.05, 0.2, 0.8)]
        assert dists[0] < dists[1] < dists[2]
        assert dists[0] < 1e-2

    def test_rejects_bad_args(self):
        with pytest.raises(LinalgError):
            haar_random(1, 0)
        with pytest.raises(LinalgError):
            random_hermitian(4, -1.0, 0)
