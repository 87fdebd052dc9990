"""Ideal pure-state simulation.

Gates are applied by contracting the gate's local matrix against the target
axes of the ``(2,)*n`` amplitude tensor, restricted to the slice where every
control qubit is 1.  Nothing of size ``2^n x 2^n`` is ever built here; that is
what :func:`hhllab.circuit.circuit_unitary` is for.

Sampling uses numpy's PCG64 bit generator (``numpy.random.Generator(PCG64(seed))``),
whose output stream is fixed by the algorithm and seed on every platform.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Barrier, Circuit, Instruction, Measure, base_matrix
from .errors import (
    DimensionMismatch,
    EmptyMeasurementSet,
    IndexOutOfRange,
    InvalidParameter,
    NotNormalized,
    ZeroProbabilityBranch,
)

NORM_ATOL = 1e-10


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def apply_matrix(
    state: np.ndarray,
    matrix: np.ndarray,
    targets: Sequence[int],
    num_qubits: int,
    controls: Sequence[int] = (),
) -> np.ndarray:
    """Apply ``matrix`` (little-endian over ``targets``) to a flat state, returning a new array.

    ``matrix`` need not be unitary, which lets the density-matrix backend reuse
    this for Kraus operators.
    """
    n = num_qubits
    psi = np.array(state, dtype=complex).reshape((2,) * n)
    ctrl_axes = {n - 1 - c for c in controls}
    sl = tuple(1 if ax in ctrl_axes else slice(None) for ax in range(n))
    remaining = [ax for ax in range(n) if ax not in ctrl_axes]
    src = [remaining.index(n - 1 - t) for t in reversed(targets)]
    k = len(targets)

    sub = psi[sl]
    moved = np.moveaxis(sub, src, list(range(k)))
    shape = moved.shape
    updated = (matrix @ moved.reshape(1 << k, -1)).reshape(shape)
    psi[sl] = np.moveaxis(updated, list(range(k)), src)
    return psi.reshape(-1)


def qubit_probabilities(probs: np.ndarray, measured: Sequence[int], num_qubits: int) -> np.ndarray:
    """Marginal distribution over ``measured`` with ``measured[0]`` as the most significant bit."""
    n = num_qubits
    tensor = np.asarray(probs, dtype=float).reshape((2,) * n)
    keep = [n - 1 - q for q in measured]
    drop = tuple(ax for ax in range(n) if ax not in keep)
    reduced = tensor.sum(axis=drop) if drop else tensor
    # remaining axes are in ascending axis order; permute to the requested order
    remaining = sorted(keep)
    perm = [remaining.index(ax) for ax in keep]
    return np.transpose(reduced, perm).reshape(-1)


def render_bits(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.num_qubits:
            raise DimensionMismatch(f"{amps.size} amplitudes for {self.num_qubits} qubits")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise NotNormalized(f"state norm^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, num_qubits)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size != 1 << n:
            raise DimensionMismatch(f"{amps.size} is not a power of two")
        return cls(amps, n)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True)
class ShotHistogram:
    """Counts keyed by rendered bitstring (first measured qubit leftmost)."""

    counts: dict[str, int]
    shots: int
    seed: int | None
    measured: tuple[int, ...] = field(default=())

    def probability(self, key: str) -> float:
        return self.counts.get(key, 0) / self.shots

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "count", "probability"])
        for key in sorted(self.counts):
            w.writerow([key, self.counts[key], f"{self.counts[key] / self.shots:.12g}"])
        return buf.getvalue()


SnapshotSet = dict  # barrier label -> StateVector


def _later_gate_touches(ops, start: int, qubit: int) -> bool:
    for op in ops[start + 1:]:
        if isinstance(op, Instruction) and qubit in op.qubits:
            return True
    return False


def _collapse(amps: np.ndarray, qubit: int, n: int, rng: np.random.Generator) -> np.ndarray:
    p1 = float(qubit_probabilities(np.abs(amps) ** 2, [qubit], n)[1])
    outcome = int(rng.random() < p1)
    mask = ((np.arange(amps.size) >> qubit) & 1) == outcome
    out = np.where(mask, amps, 0.0)
    return out / np.sqrt(p1 if outcome else 1.0 - p1)


def run_ideal(
    c: Circuit, initial: StateVector | None = None, seed: int | None = None
) -> tuple[StateVector, SnapshotSet]:
    """Evolve ``|0...0>`` (or ``initial``) through ``c``.

    A measurement followed by no further gate on its qubit leaves the state
    untouched (sampling happens afterwards via :func:`sample`).  A measurement
    that *is* followed by a gate on that qubit collapses the state, drawing
    the outcome from a PCG64 stream seeded with ``seed``.
    """
    n = c.num_qubits
    amps = (StateVector.zero(n) if initial is None else initial).amplitudes.copy()
    if amps.size != 1 << n:
        raise DimensionMismatch("initial state does not match circuit width")
    snapshots: SnapshotSet = {}
    rng = None
    for i, op in enumerate(c.ops):
        if isinstance(op, Instruction):
            amps = apply_matrix(amps, base_matrix(op.gate), op.targets, n, op.gate.controls)
        elif isinstance(op, Barrier):
            snapshots[op.label] = StateVector(amps.copy(), n)
        elif isinstance(op, Measure) and _later_gate_touches(c.ops, i, op.qubit):
            rng = rng or make_rng(seed)
            amps = _collapse(amps, op.qubit, n, rng)
    return StateVector(amps, n), snapshots


def sample_distribution(
    probs: np.ndarray, shots: int, seed: int | None, width: int
) -> dict[str, int]:
    """Inverse-CDF sampling of ``shots`` outcomes from a discrete distribution."""
    if shots < 1:
        raise InvalidParameter("shots must be >= 1")
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    cdf = np.cumsum(probs / probs.sum())
    cdf[-1] = 1.0
    u = make_rng(seed).random(shots)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    counts = np.bincount(idx, minlength=cdf.size)
    return {render_bits(i, width): int(k) for i, k in enumerate(counts) if k}


def sample(s: StateVector, measured: Sequence[int], shots: int, seed: int | None) -> ShotHistogram:
    """Draw ``shots`` computational-basis outcomes of the ``measured`` qubits."""
    measured = tuple(int(q) for q in measured)
    if not measured:
        raise EmptyMeasurementSet("no qubits to measure")
    for q in measured:
        if not 0 <= q < s.num_qubits:
            raise IndexOutOfRange(f"qubit {q} out of range")
    marginal = qubit_probabilities(s.probabilities(), measured, s.num_qubits)
    counts = sample_distribution(marginal, shots, seed, len(measured))
    return ShotHistogram(counts, shots, seed, measured)


def postselect(s: StateVector, qubit: int, outcome: int) -> tuple[StateVector, float]:
    """Project ``qubit`` onto ``outcome`` and renormalise; returns the branch probability."""
    if not 0 <= qubit < s.num_qubits:
        raise IndexOutOfRange(f"qubit {qubit} out of range")
    mask = ((np.arange(s.amplitudes.size) >> qubit) & 1) == int(outcome)
    branch = np.where(mask, s.amplitudes, 0.0)
    prob = float(np.vdot(branch, branch).real)
    if prob <= 1e-14:
        raise ZeroProbabilityBranch(f"P(q{qubit}={outcome}) = {prob:.3e}")
    return StateVector(branch / np.sqrt(prob), s.num_qubits), prob


def state_fidelity(a, b) -> float:
    """``|<a|b>|^2`` for pure states (global phase drops out)."""
    va, vb = np.asarray(a, dtype=complex).reshape(-1), np.asarray(b, dtype=complex).reshape(-1)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"dimensions {va.size} and {vb.size} differ")
    return float(min(1.0, abs(np.vdot(va, vb)) ** 2))
