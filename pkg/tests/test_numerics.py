import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import expm_oracle, op, random_density, random_hermitian, random_unit, rng

from conecalc.errors import BadFactorization, NonHermitian, NotDensityMatrix
from conecalc.numerics import (
    LinearOperator,
    hermitian_eig,
    identity,
    kron,
    op_exp,
    partial_trace,
)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestHermitianEig:
    def test_sigma_x_analytic(self):
        spec = hermitian_eig(op("s", SIGMA_X))
        assert np.allclose(spec.eigenvalues, [-1.0, 1.0])
        assert spec.gap01 == pytest.approx(2.0)

    def test_identity_is_flat(self):
        spec = hermitian_eig(identity("s", 3))
        assert np.allclose(spec.eigenvalues, [1.0, 1.0, 1.0])
        assert spec.gap01 == 0.0

    def test_residuals_on_random_matrix(self):
        h = op("s", random_hermitian(rng(7), 8))
        spec = hermitian_eig(h)
        scale = np.linalg.norm(h.mat, 2)
        for k in range(8):
            residual = np.linalg.norm(
                h.mat @ spec.eigenvectors[:, k] - spec.eigenvalues[k] * spec.eigenvectors[:, k]
            )
            assert residual <= 1e-10 * scale

    def test_reconstruction_invariant(self):
        gen = rng(11)
        for _ in range(500):
            n = int(gen.integers(1, 33))
            h = op("s", random_hermitian(gen, n))
            spec = hermitian_eig(h)
            rebuilt = (spec.eigenvectors * spec.eigenvalues) @ spec.eigenvectors.conj().T
            scale = max(np.linalg.norm(h.mat, 2), 1e-300)
            assert np.linalg.norm(h.mat - rebuilt, 2) <= 1e-10 * scale

    def test_phase_convention_is_deterministic(self):
        h = op("s", random_hermitian(rng(3), 6))
        a = hermitian_eig(h)
        b = hermitian_eig(LinearOperator("s", h.mat.copy()))
        assert np.array_equal(a.eigenvectors, b.eigenvectors)
        # first non-negligible component of each eigenvector is real positive
        for k in range(6):
            v = a.eigenvectors[:, k]
            lead = v[np.abs(v) > 1e-8 * np.abs(v).max()][0]
            assert lead.real > 0 and abs(lead.imag) <= 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitian):
            hermitian_eig(op("s", [[0.0, 1.0], [0.0, 0.0]]))


class TestOpExp:
    def test_zero_time_is_identity(self):
        h = op("s", random_hermitian(rng(5), 5))
        assert np.allclose(op_exp(h, 0.0).mat, np.eye(5), atol=1e-14)

    def test_two_by_two_closed_form(self):
        # exp(beta*sigma_x) = cosh(beta) I + sinh(beta) sigma_x, all entries > 0
        beta = 1.3
        got = op_exp(op("s", -SIGMA_X), -beta)
        want = np.cosh(beta) * np.eye(2) + np.sinh(beta) * SIGMA_X
        assert np.allclose(got.mat, want, atol=1e-12)
        assert (got.mat.real > 0).all()

    def test_semigroup_law(self):
        h = op("s", random_hermitian(rng(9), 6))
        s, t = 0.7, 1.9
        lhs = op_exp(h, s).mat @ op_exp(h, t).mat
        rhs = op_exp(h, s + t).mat
        assert np.linalg.norm(lhs - rhs, 2) <= 1e-9 * np.linalg.norm(rhs, 2)

    def test_spectrum_maps_exponentially(self):
        h = op("s", random_hermitian(rng(13), 7))
        t = 0.4
        vals = np.sort(np.linalg.eigvalsh(op_exp(h, t).mat))
        want = np.sort(np.exp(t * hermitian_eig(h).eigenvalues))
        assert np.allclose(vals, want, rtol=1e-9)

    def test_against_independent_exponential(self):
        h = op("s", random_hermitian(rng(17), 9))
        got = op_exp(h, -1.1).mat
        want = expm_oracle(-1.1 * h.mat)
        assert np.linalg.norm(got - want, 2) <= 1e-10 * np.linalg.norm(want, 2)


class TestKron:
    def test_identity_factors(self):
        assert np.array_equal(kron(identity("a", 2), identity("b", 3)).mat, np.eye(6))

    def test_basis_action(self):
        # (sigma_x (x) 1) e1(x)e1 = e2(x)e1
        big = kron(op("a", SIGMA_X), identity("b", 2))
        e11 = np.kron([1, 0], [1, 0]).astype(complex)
        e21 = np.kron([0, 1], [1, 0]).astype(complex)
        assert np.allclose(big.mat @ e11, e21)

    def test_norm_is_multiplicative(self):
        gen = rng(23)
        for _ in range(20):
            a = op("a", random_hermitian(gen, 3))
            b = op("b", random_hermitian(gen, 4))
            assert kron(a, b).norm() == pytest.approx(a.norm() * b.norm(), rel=1e-10)


class TestPartialTrace:
    def test_product_state(self):
        psi = random_unit(rng(29), 3)
        omega = random_unit(rng(31), 2)
        rho = np.outer(np.kron(psi, omega), np.kron(psi, omega).conj())
        reduced = partial_trace(op("ab", rho), 3)
        assert np.allclose(reduced.mat, np.outer(psi, psi.conj()), atol=1e-12)

    def test_maximally_entangled_pair(self):
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        reduced = partial_trace(op("qq", np.outer(bell, bell)), 2)
        assert np.allclose(reduced.mat, np.eye(2) / 2, atol=1e-12)

    def test_pure_state_matches_svd_oracle(self):
        psi = random_unit(rng(37), 6)
        reduced = partial_trace(op("ab", np.outer(psi, psi.conj())), 3)
        coeffs = psi.reshape(3, 2)
        want = np.sort(np.linalg.svd(coeffs, compute_uv=False) ** 2)
        got = np.sort(np.linalg.eigvalsh(reduced.mat))[-2:]
        assert np.allclose(got, want, atol=1e-12)

    def test_trace_and_positivity_preserved(self):
        gen = rng(41)
        for _ in range(25):
            rho = random_density(gen, 6)
            reduced = partial_trace(op("ab", rho), 2)
            assert np.trace(reduced.mat).real == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.eigvalsh(reduced.mat).min() >= -1e-10

    def test_bad_factor(self):
        rho = random_density(rng(43), 6)
        with pytest.raises(BadFactorization):
            partial_trace(op("ab", rho), 4)

    def test_rejects_non_density(self):
        with pytest.raises(NotDensityMatrix):
            partial_trace(op("ab", np.eye(4)), 2)  # trace 4, not 1


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
def test_eigh_orthonormal_columns(n, seed):
    spec = hermitian_eig(op("s", random_hermitian(rng(seed), n)))
    gram = spec.eigenvectors.conj().T @ spec.eigenvectors
    assert np.abs(gram - np.eye(n)).max() <= 1e-10
    assert (np.diff(spec.eigenvalues) >= -1e-12).all()
