"""Dense complex linear algebra for desk-scale problems.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.  The
Hermitian eigensolver is a cyclic Jacobi iteration (no LAPACK), and the two
classical reference solvers count their scalar multiply-adds so they can be
compared against the cost formulas in :mod:`hhllab.bench`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    MaxIterationsExceeded,
    NoConvergence,
    NonHermitianInput,
    NonSquareInput,
    NotPositiveDefinite,
    SingularMatrix,
)

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class EigenDecomposition(NamedTuple):
    """Eigenvalues in ascending order and orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SolverRun:
    """Outcome of an instrumented classical solve."""

    method: str
    x: np.ndarray
    iterations: int
    ops: int


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise NonSquareInput(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def as_vector(v) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(-1)


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NonSquareInput(f"matrix is {a.shape[0]}x{a.shape[1]}, expected square")


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= atol)


def is_unitary(a, atol: float = UNITARY_ATOL) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a.conj().T @ a - eye), initial=0.0) <= atol)


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    # Rotate each column so its largest-magnitude entry (first one on ties) is real positive.
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        mags = np.abs(col)
        idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, k] = col * (abs(col[idx]) / col[idx])
    return out


def hermitian_eigendecompose(
    a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary and then applies the classical real Jacobi rotation, so
    the pivot is annihilated exactly.  Sweeps continue until the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||A||_F)``.

    Args:
        a: Hermitian matrix.
        tol: relative off-diagonal tolerance.
        max_sweeps: cap on full cyclic sweeps.

    Returns:
        EigenDecomposition with ascending eigenvalues. Each eigenvector has its
        largest-magnitude component real and positive.

    Raises:
        NonSquareInput: ``a`` is not square.
        NonHermitianInput: ``a`` deviates from its adjoint by more than 1e-12.
        NoConvergence: the sweep cap was reached.
    """
    a = as_matrix(a)
    _require_square(a)
    if not is_hermitian(a):
        raise NonHermitianInput("matrix is not Hermitian within 1e-12")
    n = a.shape[0]
    work = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(work)))

    for _ in range(max_sweeps + 1):
        if _off_diagonal_norm(work) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app, aqq = work[p, p].real, work[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                work[:, idx] = work[:, idx] @ g
                work[idx, :] = g.conj().T @ work[idx, :]
                work[p, q] = work[q, p] = 0.0
                work[p, p] = work[p, p].real
                work[q, q] = work[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    values = np.real(np.diag(work)).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], _fix_phase(v[:, order]))


def matrix_power_via_eigen(eig: EigenDecomposition, t: float, power: int) -> np.ndarray:
    """Return ``exp(i A t)**power`` assembled as ``V diag(exp(i lambda t power)) V^H``."""
    phases = np.exp(1j * eig.values * t * power)
    return (eig.vectors * phases) @ eig.vectors.conj().T


def matrix_exponential_i(a, t: float) -> np.ndarray:
    """Unitary ``exp(i A t)`` for Hermitian ``A``."""
    return matrix_power_via_eigen(hermitian_eigendecompose(a), t, 1)


def hermitian_embedding(a) -> np.ndarray:
    """Return the Hermitian block matrix ``[[0, A], [A^H, 0]]``."""
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = a
    out[n:, :n] = a.conj().T
    return out


def gaussian_elimination(a, b) -> SolverRun:
    """Solve ``A x = b`` with partial pivoting, counting scalar multiply-adds.

    Divisions are counted as one operation each, alongside the multiply-adds of
    the elimination and back-substitution loops.
    """
    a = as_matrix(a)
    _require_square(a)
    b = as_vector(b)
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionMismatch(f"A is {n}x{n} but b has length {b.shape[0]}")
    m = a.copy()
    y = b.copy()
    ops = 0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[piv, k]) <= 1e-12:
            raise SingularMatrix(f"pivot {k} has magnitude {abs(m[piv, k]):.3e}")
        if piv != k:
            m[[k, piv]] = m[[piv, k]]
            y[[k, piv]] = y[[piv, k]]
        for i in range(k + 1, n):
            factor = m[i, k] / m[k, k]
            m[i, k + 1:] -= factor * m[k, k + 1:]
            y[i] -= factor * y[k]
            m[i, k] = 0.0
            ops += 1 + (n - k - 1) + 1
    x = np.zeros(n, dtype=complex)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - m[i, i + 1:] @ x[i + 1:]) / m[i, i]
        ops += (n - i - 1) + 1
    return SolverRun("gaussian_elimination", x, 1, ops)


def solve_linear_reference(a, b) -> np.ndarray:
    """Classical oracle solution of ``A x = b`` by Gaussian elimination."""
    return gaussian_elimination(a, b).x


def conjugate_gradient_run(a, b, eps: float = 1e-10, max_iter: int | None = None) -> SolverRun:
    """Conjugate gradient for Hermitian positive definite ``A`` with op counting.

    One iteration costs ``nnz(A)`` multiply-adds for the matrix-vector product
    plus ``5 N`` for the two inner products and three vector updates.
    """
    a = as_matrix(a)
    _require_square(a)
    b = as_vector(b)
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionMismatch(f"A is {n}x{n} but b has length {b.shape[0]}")
    if max_iter is None:
        max_iter = 10 * n
    nnz = int(np.count_nonzero(a))
    per_iteration = nnz + 5 * n

    x = np.zeros(n, dtype=complex)
    r = b.copy()
    p = r.copy()
    rr = float(np.vdot(r, r).real)
    target = eps * float(np.linalg.norm(b))
    ops = n  # initial residual norm
    it = 0
    while np.sqrt(rr) > target:
        if it >= max_iter:
            raise MaxIterationsExceeded(f"CG residual {np.sqrt(rr):.3e} after {it} iterations")
        ap = a @ p
        curvature = np.vdot(p, ap).real
        if curvature <= 0.0:
            raise NotPositiveDefinite(f"non-positive curvature p^H A p = {curvature:.3e}")
        alpha = rr / curvature
        x += alpha * p
        r -= alpha * ap
        rr_new = float(np.vdot(r, r).real)
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
        ops += per_iteration
    return SolverRun("conjugate_gradient", x, it, ops)


def conjugate_gradient(a, b, eps: float = 1e-10, max_iter: int | None = None) -> tuple[np.ndarray, int]:
    run = conjugate_gradient_run(a, b, eps, max_iter)
    return run.x, run.iterations


def condition_number(a) -> float:
    """``|lambda|_max / |lambda|_min`` of a Hermitian matrix."""
    mags = np.abs(hermitian_eigendecompose(a).values)
    lo, hi = mags.min(), mags.max()
    if hi == 0.0 or lo <= 1e-12 * hi:
        raise SingularMatrix("matrix has a (numerically) zero eigenvalue")
    return float(hi / lo)


# JSON wire format: {"rows": N, "cols": M, "re": [...], "im": [...]} in row-major order.

def matrix_to_json(a) -> dict:
    a = as_matrix(a)
    flat = a.reshape(-1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise DimensionMismatch(f"expected {rows * cols} entries, got re={re.size} im={im.size}")
    return (re + 1j * im).reshape(rows, cols)


def vector_to_json(v) -> dict:
    v = as_vector(v)
    return matrix_to_json(v.reshape(-1, 1))


def vector_from_json(obj) -> np.ndarray:
    # Bare lists of reals are accepted as a convenience for hand-written problem files.
    if isinstance(obj, list):
        return np.asarray(obj, dtype=complex)
    return matrix_from_json(obj).reshape(-1)
