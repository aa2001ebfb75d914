import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from umlaut.optim import (
    diagonal_basis,
    gell_mann_basis,
    mirror_descent,
    multistart,
    numerical_gradient,
    orthonormalize,
    random_start,
)
from umlaut.random import random_density

from oracles import rel_ent


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gell_mann_orthonormal_traceless(d):
    basis = gell_mann_basis(d)
    assert len(basis) == d * d - 1
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    assert_allclose(gram, np.eye(len(basis)), atol=1e-12)
    for b in basis:
        assert abs(np.trace(b)) < 1e-12
        assert_allclose(b, b.conj().T)


def test_trivial_dimension_has_empty_basis():
    assert gell_mann_basis(1) == []


def test_diagonal_basis_is_subset():
    assert len(diagonal_basis(4)) == 3
    assert all(np.count_nonzero(b - np.diag(np.diag(b))) == 0 for b in diagonal_basis(4))


def test_orthonormalize_drops_dependent():
    a = np.diag([1.0, -1.0])
    out = orthonormalize([a, 2 * a, np.array([[0, 1], [1, 0]])])
    assert len(out) == 2


def test_numerical_gradient_linear():
    h = np.diag([0.3, -0.2, 0.5]).astype(complex)
    basis = gell_mann_basis(3)
    g = numerical_gradient(lambda x: np.trace(h @ x).real, np.eye(3) / 3, basis)
    # traceless projection of h
    assert_allclose(g, h - np.trace(h) / 3 * np.eye(3), atol=1e-8)


@settings(max_examples=6)
@given(st.integers(0, 2**31 - 1))
def test_mirror_descent_finds_relative_entropy_minimum(seed):
    target = random_density(3, seed)
    res = mirror_descent(lambda x: rel_ent(target, x), np.eye(3) / 3, tol=1e-12, window=3, max_iter=500)
    assert res.value < 1e-8
    assert_allclose(res.x, target, atol=1e-4)


def test_sqrt_schedule_converges_on_linear_objective():
    h = np.diag([1.0, 0.0])
    res = mirror_descent(lambda x: np.trace(h @ x).real, np.eye(2) / 2, schedule="sqrt", max_iter=3000, tol=1e-14)
    assert res.value < 1e-3


def test_record_history():
    res = mirror_descent(lambda x: np.trace(x @ x).real, random_density(2, 1), record=True, max_iter=20)
    values = [v for _, v in res.history]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


def test_multistart_deterministic_and_sorted():
    f = lambda x: np.trace(np.diag([0.2, 0.5, 0.9]) @ x).real
    r1 = multistart(f, 3, 3, seed=4, max_iter=50)
    r2 = multistart(f, 3, 3, seed=4, max_iter=50)
    assert [r.value for r in r1] == [r.value for r in r2]
    assert [r.value for r in r1] == sorted(r.value for r in r1)


def test_random_start_full_rank():
    x = random_start(4, np.random.default_rng(0))
    assert np.linalg.eigvalsh(x).min() > 0.5 / 4 - 1e-12
    assert np.isclose(np.trace(x).real, 1)
