"""Circuit builders for the QFT, its inverse, and (inverse) phase estimation.

``build_qft(n)`` on qubits ``0..n-1`` realises the DFT matrix
``F[j, k] = exp(2 pi i j k / 2^n) / sqrt(2^n)`` in the little-endian basis.
Both builders accept ``swap_first``: the SWAP block that reverses qubit order
can sit at either end of the Hadamard/controlled-phase network, and either
placement gives the same unitary once the network is mirrored accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, FromMatrix, H, Phase, SWAP, append_gate
from .errors import InvalidParameter, SpecInconsistent
from .linalg import is_unitary


def _swap_block(c: Circuit, qubits: Sequence[int]) -> Circuit:
    n = len(qubits)
    for j in range(n // 2):
        c = append_gate(c, SWAP(), (qubits[j], qubits[n - 1 - j]))
    return c


def _network(c: Circuit, qubits: Sequence[int], sign: int) -> Circuit:
    # Hadamard + controlled-phase ladder, top qubit first.
    n = len(qubits)
    q = list(qubits)
    for j in range(n - 1, -1, -1):
        c = append_gate(c, H(), q[j])
        for k in range(j - 1, -1, -1):
            c = append_gate(c, Phase(sign * math.pi / 2 ** (j - k), q[k]), q[j])
    return c


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidParameter("QFT needs at least one qubit")


def qft_on(c: Circuit, qubits: Sequence[int], swap_first: bool = False) -> Circuit:
    """Append a QFT on ``qubits`` (least significant first) to ``c``."""
    _check_n(len(qubits))
    if swap_first:
        return _invert_network(_swap_block(c, qubits), qubits, sign=+1)
    return _swap_block(_network(c, qubits, +1), qubits)


def iqft_on(c: Circuit, qubits: Sequence[int], swap_first: bool = True) -> Circuit:
    """Append an inverse QFT on ``qubits`` to ``c``."""
    _check_n(len(qubits))
    if swap_first:
        return _invert_network(_swap_block(c, qubits), qubits, sign=-1)
    return _swap_block(_network(c, qubits, -1), qubits)


def _invert_network(c: Circuit, qubits: Sequence[int], sign: int) -> Circuit:
    # Reverse-order ladder: bottom qubit first, phases applied before each Hadamard.
    n = len(qubits)
    for j in range(n):
        for k in range(j):
            c = append_gate(c, Phase(sign * math.pi / 2 ** (j - k), qubits[k]), qubits[j])
        c = append_gate(c, H(), qubits[j])
    return c


def build_qft(n: int, swap_first: bool = False) -> Circuit:
    """QFT on ``n`` qubits.

    The default ends with the SWAP reversal.  ``swap_first=True`` moves it to
    the front and mirrors the ladder, which for ``n = 2`` gives the sequence
    SWAP, H(q0), CP(+pi/2), H(q1).
    """
    _check_n(n)
    return qft_on(Circuit(n), range(n), swap_first)


def build_iqft(n: int, swap_first: bool = True) -> Circuit:
    """Inverse QFT on ``n`` qubits.

    The default starts with the SWAP block.  ``swap_first=False`` puts the
    ladder (top qubit first, negative phases) before the SWAPs, giving
    H(q1), CP(-pi/2), H(q0), SWAP for ``n = 2``.
    """
    _check_n(n)
    return iqft_on(Circuit(n), range(n), swap_first)


def dft_matrix(n: int) -> np.ndarray:
    dim = 1 << n
    j = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(j, j) / dim) / math.sqrt(dim)


@dataclass(frozen=True)
class QPESpec:
    """Inputs to phase estimation.

    ``power(j)`` must return ``U^(2^j)`` as a matrix on the ``target`` register
    (least significant qubit first).  ``clock`` lists the clock qubits, with
    ``clock[j]`` controlling ``power(j)``.
    """

    n_clock: int
    power: Callable[[int], np.ndarray]
    clock: tuple[int, ...]
    target: tuple[int, ...]
    num_qubits: int

    def matrices(self) -> list[np.ndarray]:
        return [np.asarray(self.power(j), dtype=complex) for j in range(self.n_clock)]


def check_qpe_spec(spec: QPESpec, atol: float = 1e-9) -> list[np.ndarray]:
    """Validate a QPESpec and return its power matrices."""
    if spec.n_clock < 1 or len(spec.clock) != spec.n_clock:
        raise SpecInconsistent("clock register size does not match n_clock")
    mats = spec.matrices()
    dim = 1 << len(spec.target)
    for j, m in enumerate(mats):
        if m.shape != (dim, dim):
            raise SpecInconsistent(f"power({j}) has shape {m.shape}, expected {(dim, dim)}")
        if not is_unitary(m, atol=1e-10):
            raise SpecInconsistent(f"power({j}) is not unitary")
        expected = np.linalg.matrix_power(mats[0], 2 ** j)
        if np.max(np.abs(m - expected)) > atol:
            raise SpecInconsistent(f"power({j}) differs from power(0)^{2 ** j}")
    return mats


def build_qpe(spec: QPESpec, base: Circuit | None = None) -> Circuit:
    """Phase estimation: Hadamards, controlled powers, inverse QFT.

    The inverse QFT is the ladder-then-SWAP variant.  Appends to ``base`` if given.
    """
    mats = check_qpe_spec(spec)
    c = Circuit(spec.num_qubits) if base is None else base
    for q in spec.clock:
        c = append_gate(c, H(), q)
    for j, m in enumerate(mats):
        c = append_gate(c, FromMatrix(m, spec.clock[j]), spec.target)
    return iqft_on(c, spec.clock, swap_first=False)


def build_inverse_qpe(spec: QPESpec, base: Circuit | None = None) -> Circuit:
    """Undo :func:`build_qpe`: QFT (SWAPs first), controlled inverse powers, Hadamards."""
    mats = check_qpe_spec(spec)
    c = Circuit(spec.num_qubits) if base is None else base
    c = qft_on(c, spec.clock, swap_first=True)
    for j in range(spec.n_clock - 1, -1, -1):
        c = append_gate(c, FromMatrix(mats[j].conj().T, spec.clock[j]), spec.target)
    for q in spec.clock:
        c = append_gate(c, H(), q)
    return c


def eigenvalue_to_clock(lam: float, t: float, n_clock: int) -> float:
    """Clock-register value ``2^n lam t / (2 pi)`` that QPE writes for eigenvalue ``lam``."""
    return (2 ** n_clock) * lam * t / (2 * math.pi)
