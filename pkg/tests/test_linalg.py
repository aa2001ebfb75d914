import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm, logm, sqrtm

from umlaut.errors import InvariantError
from umlaut.linalg import (
    check_density,
    check_hermitian,
    eigh,
    kernel_basis,
    matrix_func,
    partial_trace,
    permute_subsystems,
    reconstruct,
    schatten_norm,
    support_projector,
    tensor,
    von_neumann_entropy,
)
from umlaut.random import random_density, random_unitary

from oracles import ptrace_keep_a, ptrace_keep_b

seeds = st.integers(0, 2**31 - 1)
small_dims = st.integers(1, 3)


def herm(d, seed):
    g = np.random.default_rng(seed).normal(size=(d, d, 2))
    m = g[..., 0] + 1j * g[..., 1]
    return (m + m.conj().T) / 2


class TestPartialTrace:
    @given(small_dims, small_dims, seeds)
    def test_product_factors(self, da, db, seed):
        a, b = random_density(da, seed), random_density(db, seed + 1)
        joint = np.kron(a, b)
        assert_allclose(partial_trace(joint, (da, db), "A"), a, atol=1e-12)
        assert_allclose(partial_trace(joint, (da, db), "B"), b, atol=1e-12)

    @given(small_dims, small_dims, seeds)
    def test_against_einsum(self, da, db, seed):
        m = random_density(da * db, seed)
        assert_allclose(partial_trace(m, (da, db), 0), ptrace_keep_a(m, da, db), atol=1e-12)
        assert_allclose(partial_trace(m, (da, db), [1]), ptrace_keep_b(m, da, db), atol=1e-12)

    def test_three_parties_keeps_order(self):
        a, b, c = (random_density(d, s) for d, s in ((2, 1), (3, 2), (2, 3)))
        joint = tensor(a, b, c)
        assert_allclose(partial_trace(joint, (2, 3, 2), [0, 2]), np.kron(a, c), atol=1e-12)
        assert_allclose(partial_trace(joint, (2, 3, 2), [2, 0]), np.kron(a, c), atol=1e-12)
        assert_allclose(partial_trace(joint, (2, 3, 2), []), [[1.0]], atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvariantError):
            partial_trace(np.eye(4), (2, 3), "A")

    def test_tag_needs_two_systems(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(8), (2, 2, 2), "A")


def test_permute_subsystems_reorders_kron():
    a, b, c = random_density(2, 4), random_density(3, 5), random_density(2, 6)
    out = permute_subsystems(tensor(a, b, c), (2, 3, 2), (2, 0, 1))
    assert_allclose(out, tensor(c, a, b), atol=1e-14)


def test_tensor_needs_operand():
    with pytest.raises(ValueError):
        tensor()


class TestValidation:
    def test_non_hermitian(self):
        m = np.array([[1, 1e-3], [0, 0]])
        with pytest.raises(InvariantError, match="Hermitian"):
            check_hermitian(m)

    def test_bad_trace(self):
        with pytest.raises(InvariantError, match="trace"):
            check_density(np.eye(2))

    def test_negative(self):
        with pytest.raises(InvariantError, match="semidefinite"):
            check_density(np.diag([1.1, -0.1]))

    def test_non_square(self):
        with pytest.raises(InvariantError):
            check_density(np.ones((2, 3)) / 2)

    def test_nan(self):
        with pytest.raises(InvariantError):
            check_density(np.array([[np.nan, 0], [0, 1]]))

    def test_hermitian_part_returned(self):
        m = np.array([[0.5, 1e-12], [0, 0.5]])
        out = check_density(m)
        assert_allclose(out, out.conj().T)


class TestSpectral:
    def test_eigh_phase_convention(self):
        h = herm(4, 0)
        d1, d2 = eigh(h), eigh(h * 1.0)
        assert_allclose(d1.eigenvectors, d2.eigenvectors)
        piv = d1.eigenvectors[np.argmax(np.abs(d1.eigenvectors), axis=0), range(4)]
        assert_allclose(piv.imag, 0, atol=1e-15)
        assert np.all(piv.real > 0)
        assert_allclose(reconstruct(d1), h, atol=1e-12)

    def test_support_and_kernel(self):
        p = random_density(4, 1, rank=2)
        proj = support_projector(p)
        assert_allclose(proj @ proj, proj, atol=1e-12)
        assert np.isclose(np.trace(proj).real, 2)
        assert kernel_basis(p, 1e-10).shape == (4, 2)

    @given(st.integers(1, 4), seeds)
    def test_log_exp_match_scipy(self, d, seed):
        rho = random_density(d, seed)
        assert_allclose(matrix_func(rho, "log"), logm(rho), atol=1e-9)
        h = herm(d, seed)
        assert_allclose(matrix_func(h, "exp"), expm(h), atol=1e-9, rtol=1e-9)

    def test_power_and_sqrt(self):
        rho = random_density(3, 7)
        assert_allclose(matrix_func(rho, "sqrt"), sqrtm(rho), atol=1e-10)
        p = matrix_func(rho, "power", alpha=0.3)
        assert_allclose(matrix_func(p, "power", alpha=1 / 0.3), rho, atol=1e-10)

    def test_positive_and_negative_parts(self):
        h = herm(3, 3)
        pos = matrix_func(h, "pos_part")
        neg = matrix_func(h, "neg_part")
        assert_allclose(pos - neg, h, atol=1e-12)
        assert np.linalg.eigvalsh(pos).min() > -1e-12

    def test_coth_and_arccoth_inverse(self):
        h = np.diag([0.5, 1.7])
        c = matrix_func(h, "coth_half_arg")
        assert_allclose(np.diag(c).real, 1 / np.tanh(np.diag(h) / 2))
        back = 2 * matrix_func(c, "arccoth")
        assert_allclose(back, h, atol=1e-12)

    def test_arccoth_domain(self):
        with pytest.raises(InvariantError):
            matrix_func(np.diag([0.5, 2.0]), "arccoth")

    def test_unknown_function_and_policy(self):
        with pytest.raises(ValueError):
            matrix_func(np.eye(2), "sin")
        with pytest.raises(ValueError):
            matrix_func(np.eye(2), "log", kernel_policy="ignore")
        with pytest.raises(ValueError):
            matrix_func(np.eye(2), "power")


class TestKernelPolicies:
    rho = np.diag([0.7, 0.3, 0.0]).astype(complex)

    def test_error(self):
        with pytest.raises(InvariantError, match="singular"):
            matrix_func(self.rho, "log")

    def test_zero(self):
        out = matrix_func(self.rho, "log", kernel_policy="zero")
        assert_allclose(np.diag(out).real, [np.log(0.7), np.log(0.3), 0.0])

    def test_floor(self):
        out = matrix_func(self.rho, "log", kernel_policy="floor", tau=1e-14)
        assert np.isclose(out[2, 2].real, np.log(1e-14))

    def test_restrict(self):
        out, proj = matrix_func(self.rho, "log", kernel_policy="restrict")
        assert_allclose(proj, np.diag([1, 1, 0]), atol=1e-14)
        assert out[2, 2] == 0

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(InvariantError, match="negative"):
            matrix_func(np.diag([0.5, -0.1]), "log", kernel_policy="zero")

    def test_tiny_negative_is_kernel(self):
        out = matrix_func(np.diag([1.0, -1e-15]), "sqrt")
        assert_allclose(np.diag(out).real, [1.0, 0.0])


class TestNorms:
    def test_schatten_values(self):
        h = np.diag([3.0, -4.0])
        assert np.isclose(schatten_norm(h, 1), 7)
        assert np.isclose(schatten_norm(h, 2), 5)
        assert np.isclose(schatten_norm(h, np.inf), 4)

    def test_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            schatten_norm(np.eye(2), 0.5)

    @given(seeds)
    def test_unitary_invariance(self, seed):
        h = herm(3, seed)
        u = random_unitary(3, seed)
        for p in (1, 1.5, 3, np.inf):
            assert np.isclose(schatten_norm(u @ h @ u.conj().T, p), schatten_norm(h, p))


def test_entropy_of_maximally_mixed():
    assert np.isclose(von_neumann_entropy(np.eye(5) / 5), np.log(5))
    assert abs(von_neumann_entropy(np.diag([1.0, 0.0]))) < 1e-15
