import numpy as np
import pytest

from imkit import (
    DimensionMismatch,
    InvariantError,
    bures_angle,
    partial_transpose,
    psd_sqrt,
    root_fidelity,
    takagi,
    tensor,
    trace_norm,
)
from imkit.random import rand_density, rand_pure, rand_unitary

from oracles import ETA, SIGMA_Y, partial_transpose_direct, root_fidelity_nested, trace_norm_hermitian


class TestTensor:
    def test_identity(self):
        np.testing.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_sigma_y_pair_eigenvalues(self):
        got = np.sort(np.linalg.eigvalsh(tensor(SIGMA_Y, SIGMA_Y)))
        np.testing.assert_allclose(got, [-1, -1, 1, 1], atol=1e-12)

    def test_basis_projectors(self):
        e1 = np.zeros(2); e1[1] = 1.0
        e2 = np.zeros(3); e2[2] = 1.0
        got = tensor(np.outer(e1, e1), np.outer(e2, e2))
        expected = np.zeros((6, 6))
        expected[1 * 3 + 2, 1 * 3 + 2] = 1.0
        np.testing.assert_allclose(got, expected, atol=0)


class TestPartialTranspose:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(0)
        rho_a = rand_density(2, rng=rng).mat
        rho_b = rand_density(3, rng=rng).mat
        got = partial_transpose(tensor(rho_a, rho_b), side="B", dims=(2, 3))
        np.testing.assert_allclose(got.mat, tensor(rho_a, rho_b.T), atol=1e-14)

    def test_involution_is_exact(self):
        rng = np.random.default_rng(1)
        rho = rand_density(6, rng=rng).mat
        twice = partial_transpose(partial_transpose(rho, "B", dims=(2, 3)), "B")
        np.testing.assert_array_equal(twice.mat, rho)

    def test_eta_example(self):
        got = partial_transpose(ETA, side="B", dims=(2, 2))
        np.testing.assert_allclose(got.mat, (np.eye(4) - np.kron(SIGMA_Y, SIGMA_Y)) / 4,
                                   atol=1e-14)

    @pytest.mark.parametrize("side", ["A", "B"])
    def test_preserves_trace_and_hermiticity(self, side):
        rng = np.random.default_rng(2)
        rho = rand_density(6, rng=rng).mat
        pt = partial_transpose(rho, side, dims=(3, 2)).mat
        assert abs(np.trace(pt) - 1) < 1e-12
        assert np.abs(pt - pt.conj().T).max() < 1e-12
        np.testing.assert_allclose(pt, partial_transpose_direct(rho, (3, 2), side),
                                   atol=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partial_transpose(np.eye(6) / 6, side="B", dims=(2, 2))


class TestPsdSqrt:
    def test_identity_and_diagonal(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
        np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]),
                                   atol=1e-14)

    def test_squares_back(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = int(rng.integers(2, 8))
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            m = a @ a.conj().T
            r = psd_sqrt(m)
            np.testing.assert_allclose(r @ r, m, atol=1e-8 * max(1, np.abs(m).max()))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvariantError, match="tol_psd"):
            psd_sqrt(np.diag([1.0, -1e-3]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvariantError, match="Hermitian"):
            psd_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestTraceNorm:
    def test_sigma_y_pair(self):
        assert trace_norm(tensor(SIGMA_Y, SIGMA_Y) / 2) == pytest.approx(2.0, abs=1e-12)

    def test_zero(self):
        assert trace_norm(np.zeros((3, 3))) == 0.0

    def test_matches_eigenvalue_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            d = int(rng.integers(2, 8))
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            h = a + a.conj().T
            assert trace_norm(h) == pytest.approx(trace_norm_hermitian(h), abs=1e-10)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            d = int(rng.integers(2, 6))
            m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            u, v = rand_unitary(d, rng=rng), rand_unitary(d, rng=rng)
            assert trace_norm(u @ m @ v) == pytest.approx(trace_norm(m), abs=1e-10)


class TestRootFidelity:
    def test_self_is_one(self):
        rng = np.random.default_rng(6)
        rho = rand_density(4, rng=rng)
        assert root_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_pure_is_zero(self):
        zero = np.outer([1, 0], [1, 0]).astype(complex)
        one = np.outer([0, 1], [0, 1]).astype(complex)
        assert root_fidelity(zero, one) == pytest.approx(0.0, abs=1e-9)

    def test_zero_vs_plus(self):
        zero = np.outer([1, 0], [1, 0]).astype(complex)
        plus = np.full((2, 2), 0.5, dtype=complex)
        assert root_fidelity(zero, plus) == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_symmetry_and_pure_overlap(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            d = int(rng.integers(2, 5))
            psi, phi = rand_pure(d, rng=rng), rand_pure(d, rng=rng)
            f1 = root_fidelity(psi.density(), phi.density())
            f2 = root_fidelity(phi.density(), psi.density())
            assert f1 == pytest.approx(f2, abs=1e-10)
            assert f1 == pytest.approx(abs(np.vdot(psi.vec, phi.vec)), abs=1e-9)

    def test_matches_nested_sqrt_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            d = int(rng.integers(2, 6))
            rho, sigma = rand_density(d, rng=rng), rand_density(d, rng=rng)
            assert root_fidelity(rho, sigma) == pytest.approx(
                root_fidelity_nested(rho.mat, sigma.mat), abs=1e-9)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            root_fidelity(np.eye(2) / 2, np.eye(3) / 3)


class TestBuresAngle:
    def test_endpoints(self):
        rng = np.random.default_rng(9)
        rho = rand_density(3, rng=rng)
        assert bures_angle(rho, rho) == pytest.approx(0.0, abs=1e-4)
        zero = np.outer([1, 0], [1, 0]).astype(complex)
        one = np.outer([0, 1], [0, 1]).astype(complex)
        assert bures_angle(zero, one) == pytest.approx(np.pi / 2, abs=1e-9)

    def test_zero_vs_plus_is_quarter_pi(self):
        zero = np.outer([1, 0], [1, 0]).astype(complex)
        plus = np.full((2, 2), 0.5, dtype=complex)
        assert bures_angle(zero, plus) == pytest.approx(np.pi / 4, abs=1e-12)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            d = int(rng.integers(2, 5))
            a, b, c = (rand_density(d, rng=rng) for _ in range(3))
            assert bures_angle(a, c) <= bures_angle(a, b) + bures_angle(b, c) + 1e-8


class TestTakagi:
    def test_diagonal_phases(self):
        s = np.diag(np.exp(1j * np.array([0.7, -1.3])))
        fact = takagi(s)
        np.testing.assert_allclose(fact.sigma, [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(fact.reconstruct(), s, atol=1e-10)

    def test_offdiagonal_example(self):
        s = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        fact = takagi(s)
        np.testing.assert_allclose(fact.sigma, [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(fact.reconstruct(), s, atol=1e-10)
        # the candidate factor from the defining identity is also valid
        q = np.array([[1.0, 1.0j], [1.0, -1.0j]]) / np.sqrt(2)
        np.testing.assert_allclose(q @ q.T, s, atol=1e-12)

    @pytest.mark.parametrize("kind", ["generic", "degenerate", "rank_deficient", "near_degenerate"])
    def test_random_property(self, kind):
        rng = np.random.default_rng(hash(kind) % 2**32)
        for _ in range(25):
            d = int(rng.integers(2, 9))
            if kind == "generic":
                a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                s = a + a.T
            elif kind == "degenerate":
                s = np.exp(1j * rng.standard_normal()) * np.eye(d)
            elif kind == "rank_deficient":
                v = rand_pure(d, rng=rng).vec
                s = np.outer(v, v)
            else:
                u = rand_unitary(d, rng=rng)
                sv = np.sort(rng.random(d))[::-1]
                sv[1:] = sv[0] - 1e-11 * np.arange(1, d)
                s = u @ np.diag(sv) @ u.T
            fact = takagi(s)
            assert np.abs(fact.reconstruct() - s).max() < 1e-8
            assert np.abs(fact.q.conj().T @ fact.q - np.eye(d)).max() < 1e-9
            np.testing.assert_allclose(fact.sigma,
                                       np.linalg.svd(s, compute_uv=False), atol=1e-10)
            assert np.all(np.diff(fact.sigma) <= 1e-12)

    def test_rejects_non_symmetric(self):
        with pytest.raises(InvariantError, match="symmetric"):
            takagi(np.array([[0.0, 1.0], [2.0, 0.0]]))
