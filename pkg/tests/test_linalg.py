import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_hermitian
from hhllab.errors import (
    DimensionMismatch,
    MaxIterationsExceeded,
    NoConvergence,
    NonHermitianInput,
    NonSquareInput,
    NotPositiveDefinite,
    SingularMatrix,
)
from hhllab.linalg import (
    condition_number,
    conjugate_gradient,
    conjugate_gradient_run,
    gaussian_elimination,
    hermitian_eigendecompose,
    hermitian_embedding,
    is_hermitian,
    is_unitary,
    matrix_exponential_i,
    matrix_from_json,
    matrix_power_via_eigen,
    matrix_to_json,
    solve_linear_reference,
    vector_from_json,
    vector_to_json,
)

A_EX = np.array([[1.5, 0.5], [0.5, 1.5]])


def expm_taylor(m):
    # independent oracle: scaling and squaring around a truncated Taylor series
    norm = np.linalg.norm(m, 1)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    x = m / 2 ** s
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, 30):
        term = term @ x / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def test_worked_example_eigenpairs():
    eig = hermitian_eigendecompose(A_EX)
    np.testing.assert_allclose(eig.values, [1.0, 2.0], atol=1e-13)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(eig.vectors[:, 0], [r, -r], atol=1e-13)
    np.testing.assert_allclose(eig.vectors[:, 1], [r, r], atol=1e-13)


def test_diagonal_and_pauli_y():
    eig = hermitian_eigendecompose(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(eig.values, [-1.0, 2.0, 3.0], atol=1e-14)
    y = np.array([[0, -1j], [1j, 0]])
    eig = hermitian_eigendecompose(y)
    np.testing.assert_allclose(eig.values, [-1.0, 1.0], atol=1e-13)
    for j in range(2):
        v = eig.vectors[:, j]
        np.testing.assert_allclose(y @ v, eig.values[j] * v, atol=1e-13)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_eigendecomposition_reconstructs(n, seed):
    a = random_hermitian(np.random.default_rng(seed), n)
    eig = hermitian_eigendecompose(a)
    v = eig.vectors
    assert np.all(np.diff(eig.values) >= 0)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    np.testing.assert_allclose((v * eig.values) @ v.conj().T, a, atol=1e-11 * max(1, np.abs(a).max()))
    np.testing.assert_allclose(eig.values, np.linalg.eigvalsh(a), atol=1e-11)


def test_eigendecompose_errors():
    with pytest.raises(NonHermitianInput):
        hermitian_eigendecompose([[1, 2], [0, 1]])
    with pytest.raises(NonSquareInput):
        hermitian_eigendecompose(np.ones((2, 3)))
    with pytest.raises(NoConvergence):
        hermitian_eigendecompose(random_hermitian(np.random.default_rng(1), 6), max_sweeps=0)


def test_exponential_of_worked_example():
    # e^{iA pi/2} = V diag(i, -1) V^H, evaluated by hand
    u = matrix_exponential_i(A_EX, math.pi / 2)
    expected = 0.5 * np.array([[-1 + 1j, -1 - 1j], [-1 - 1j, -1 + 1j]])
    np.testing.assert_allclose(u, expected, atol=1e-12)
    eig = hermitian_eigendecompose(A_EX)
    np.testing.assert_allclose(matrix_power_via_eigen(eig, math.pi / 2, 2), [[0, 1], [1, 0]], atol=1e-12)


def test_exponential_t_zero_is_identity(rng):
    a = random_hermitian(rng, 4)
    np.testing.assert_allclose(matrix_exponential_i(a, 0.0), np.eye(4), atol=1e-12)


@given(st.integers(1, 6), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_exponential_matches_taylor_oracle(n, t, seed):
    a = random_hermitian(np.random.default_rng(seed), n)
    u = matrix_exponential_i(a, t)
    assert is_unitary(u, atol=1e-11)
    np.testing.assert_allclose(u, expm_taylor(1j * t * a), atol=1e-10)


@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_power_consistency(j, seed):
    a = random_hermitian(np.random.default_rng(seed), 3)
    eig = hermitian_eigendecompose(a)
    u = matrix_power_via_eigen(eig, 0.7, 1)
    np.testing.assert_allclose(matrix_power_via_eigen(eig, 0.7, 2**j), np.linalg.matrix_power(u, 2**j), atol=1e-9)


def test_hermitian_embedding():
    a = np.array([[1, 2j], [0, 1]])
    h = hermitian_embedding(a)
    assert is_hermitian(h)
    np.testing.assert_allclose(h[:2, 2:], a)
    np.testing.assert_allclose(h[2:, :2], a.conj().T)


def test_gaussian_elimination_examples():
    run = gaussian_elimination(A_EX, [0, 1])
    np.testing.assert_allclose(run.x, [-0.25, 0.75], atol=1e-14)
    assert run.ops == 6
    with pytest.raises(SingularMatrix):
        gaussian_elimination([[1, 2], [2, 4]], [1, 1])
    with pytest.raises(DimensionMismatch):
        gaussian_elimination(A_EX, [1, 2, 3])
    np.testing.assert_allclose(solve_linear_reference([[0, 1], [1, 0]], [2, 3]), [3, 2])


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_gaussian_elimination_matches_lapack(n, seed):
    r = np.random.default_rng(seed)
    a = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n)) + 3 * n * np.eye(n)
    b = r.normal(size=n)
    run = gaussian_elimination(a, b)
    np.testing.assert_allclose(run.x, np.linalg.solve(a, b), atol=1e-10)
    # closed form: sum over pivots of (n-k-1)(n-k+1) plus n(n+1)/2 for back substitution
    assert run.ops == n * (n + 1) * (2 * n + 1) // 6 - n + n * (n + 1) // 2


def test_conjugate_gradient_examples():
    x, it = conjugate_gradient(A_EX, [0, 1])
    np.testing.assert_allclose(x, [-0.25, 0.75], atol=1e-10)
    assert it == 2
    run = conjugate_gradient_run(np.eye(4), np.ones(4))
    assert run.iterations == 1 and run.ops == 4 + (4 + 5 * 4)
    with pytest.raises(NotPositiveDefinite):
        conjugate_gradient(np.diag([1.0, -1.0]), [1, 1])
    with pytest.raises(MaxIterationsExceeded):
        conjugate_gradient(np.diag([1.0, 2.0, 3.0]), [1, 1, 1], max_iter=1)


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_cg_iterations_bounded_by_distinct_eigenvalues(k, seed):
    r = np.random.default_rng(seed)
    n = 8
    levels = r.permutation(np.arange(1, 9))[:k].astype(float)
    lam = np.concatenate([levels, r.choice(levels, n - k)])
    q, _ = np.linalg.qr(r.normal(size=(n, n)))
    a = (q * lam) @ q.T
    x, it = conjugate_gradient(a, r.normal(size=n), eps=1e-10)
    assert it <= k + 1


def test_condition_number():
    assert condition_number(A_EX) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(SingularMatrix):
        condition_number([[1, 1], [1, 1]])


def test_json_round_trip(rng):
    a = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    np.testing.assert_array_equal(matrix_from_json(matrix_to_json(a)), a)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    np.testing.assert_array_equal(vector_from_json(vector_to_json(v)), v)
    np.testing.assert_array_equal(vector_from_json([0, 1]), [0, 1])
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3]})
