"""Gate and circuit intermediate representation.

Conventions
-----------
* Qubits are little-endian: qubit 0 is the least-significant bit of a basis
  state label, so ``|q3 q2 q1 q0>`` has index ``q0 + 2*q1 + 4*q2 + 8*q3``.
* A gate's local matrix (see :func:`gate_matrix`) is indexed little-endian over
  its *target* list, with the control qubits stacked above the targets.  For a
  singly controlled gate this gives the textbook block form ``[[I, 0], [0, U]]``
  (CNOT is the familiar permutation matrix).
* Circuits are immutable; :func:`append_gate` and friends return new circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    ArityMismatch,
    ContainsMeasurement,
    DuplicateTarget,
    IndexOutOfRange,
    InvalidParameter,
    NonUnitaryMatrix,
    TooLarge,
)
from .linalg import is_unitary, matrix_from_json, matrix_to_json

MAX_UNITARY_QUBITS = 10

_PARAM_COUNT = {"x": 0, "h": 0, "swap": 0, "p": 1, "ry": 1, "u": 4, "unitary": 0}


@dataclass(frozen=True, eq=False)
class Gate:
    """A gate kind with its parameters and control qubits.

    ``name`` is one of ``x``, ``h``, ``p`` (phase), ``u`` (``theta, phi, lam,
    gamma``), ``ry``, ``swap`` or ``unitary`` (an explicit matrix).
    """

    name: str
    params: tuple[float, ...] = ()
    controls: tuple[int, ...] = ()
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.name not in _PARAM_COUNT:
            raise InvalidParameter(f"unknown gate {self.name!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if len(self.params) != _PARAM_COUNT[self.name]:
            raise InvalidParameter(
                f"gate {self.name!r} takes {_PARAM_COUNT[self.name]} parameters, got {len(self.params)}"
            )
        if len(set(self.controls)) != len(self.controls):
            raise DuplicateTarget(f"repeated control qubit in {self.controls}")
        if self.name == "unitary":
            m = np.array(self.matrix, dtype=complex)
            dim = m.shape[0] if m.ndim == 2 else 0
            if m.ndim != 2 or m.shape[0] != m.shape[1] or dim < 2 or dim & (dim - 1):
                raise ArityMismatch(f"unitary gate needs a 2^k x 2^k matrix, got shape {m.shape}")
            if not is_unitary(m, atol=1e-10):
                raise NonUnitaryMatrix("matrix passed to a unitary gate is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise InvalidParameter(f"gate {self.name!r} does not take a matrix")

    @property
    def num_targets(self) -> int:
        if self.name == "swap":
            return 2
        if self.name == "unitary":
            return int(self.matrix.shape[0]).bit_length() - 1
        return 1

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.name, self.params, self.controls) != (other.name, other.params, other.controls):
            return False
        if self.matrix is None:
            return other.matrix is None
        return other.matrix is not None and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.name, self.params, self.controls))

    def with_controls(self, controls: Sequence[int]) -> "Gate":
        return Gate(self.name, self.params, tuple(controls), self.matrix)

    def adjoint(self) -> "Gate":
        if self.name in ("x", "h", "swap"):
            return self
        if self.name in ("p", "ry"):
            return Gate(self.name, (-self.params[0],), self.controls)
        if self.name == "u":
            theta, phi, lam, gamma = self.params
            return Gate("u", (-theta, -lam, -phi, -gamma), self.controls)
        return Gate("unitary", (), self.controls, self.matrix.conj().T)


# convenience constructors
def X(*controls: int) -> Gate:
    return Gate("x", (), controls)


def H() -> Gate:
    return Gate("h")


def Phase(theta: float, *controls: int) -> Gate:
    return Gate("p", (theta,), controls)


def RY(theta: float, *controls: int) -> Gate:
    return Gate("ry", (theta,), controls)


def U(theta: float, phi: float, lam: float, gamma: float = 0.0, *controls: int) -> Gate:
    return Gate("u", (theta, phi, lam, gamma), controls)


def SWAP() -> Gate:
    return Gate("swap")


def FromMatrix(matrix, *controls: int) -> Gate:
    return Gate("unitary", (), controls, np.asarray(matrix, dtype=complex))


def base_matrix(g: Gate) -> np.ndarray:
    """Matrix of the gate ignoring its controls."""
    if g.name == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if g.name == "h":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if g.name == "p":
        return np.array([[1, 0], [0, np.exp(1j * g.params[0])]], dtype=complex)
    if g.name == "ry":
        c, s = math.cos(g.params[0] / 2), math.sin(g.params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.name == "u":
        theta, phi, lam, gamma = g.params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.exp(1j * gamma) * np.array(
            [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]]
        )
    if g.name == "swap":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    return np.array(g.matrix)


def gate_matrix(g: Gate) -> np.ndarray:
    """Full ``2^k x 2^k`` unitary of ``g`` including its controls.

    The control register occupies the high bits, so the matrix is the identity
    except for the bottom-right block, which holds the base matrix.
    """
    base = base_matrix(g)
    if not g.controls:
        return base
    dim = base.shape[0] << len(g.controls)
    out = np.eye(dim, dtype=complex)
    out[dim - base.shape[0]:, dim - base.shape[0]:] = base
    return out


@dataclass(frozen=True)
class Instruction:
    gate: Gate
    targets: tuple[int, ...]

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.gate.controls + self.targets


@dataclass(frozen=True)
class Barrier:
    label: str


@dataclass(frozen=True)
class Measure:
    qubit: int
    clbit: int


Op = Union[Instruction, Barrier, Measure]


@dataclass(frozen=True)
class Circuit:
    """Ordered list of operations over ``num_qubits`` qubits and ``num_clbits`` bits.

    ``registers`` maps a register name to its qubit indices (least significant
    first); it is informational and used for rendering and snapshots.
    """

    num_qubits: int
    num_clbits: int = 0
    ops: tuple[Op, ...] = ()
    registers: tuple[tuple[str, tuple[int, ...]], ...] = ()

    @property
    def register_map(self) -> dict[str, tuple[int, ...]]:
        return dict(self.registers)

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def instructions(self) -> list[Instruction]:
        return [op for op in self.ops if isinstance(op, Instruction)]

    def has_measurements(self) -> bool:
        return any(isinstance(op, Measure) for op in self.ops)

    def _with_ops(self, ops: Iterable[Op]) -> "Circuit":
        return Circuit(self.num_qubits, self.num_clbits, tuple(ops), self.registers)

    def append(self, gate: Gate, targets: Sequence[int] | int) -> "Circuit":
        return append_gate(self, gate, targets)

    def barrier(self, label: str) -> "Circuit":
        return self._with_ops(self.ops + (Barrier(label),))

    def measure(self, qubit: int, clbit: int) -> "Circuit":
        _check_qubits(self.num_qubits, [qubit])
        if not 0 <= clbit < self.num_clbits:
            raise IndexOutOfRange(f"clbit {clbit} out of range for {self.num_clbits} clbits")
        return self._with_ops(self.ops + (Measure(qubit, clbit),))

    def compose(self, other: "Circuit", qubit_map: Sequence[int] | None = None) -> "Circuit":
        """Append ``other``'s operations, relabelling its qubits through ``qubit_map``."""
        if qubit_map is None:
            qubit_map = list(range(other.num_qubits))
        if len(qubit_map) != other.num_qubits:
            raise ArityMismatch("qubit_map must cover every qubit of the composed circuit")
        out = self
        for op in other.ops:
            if isinstance(op, Instruction):
                g = op.gate.with_controls([qubit_map[c] for c in op.gate.controls])
                out = append_gate(out, g, [qubit_map[t] for t in op.targets])
            elif isinstance(op, Barrier):
                out = out.barrier(op.label)
            else:
                out = out.measure(qubit_map[op.qubit], op.clbit)
        return out


def _check_qubits(n: int, qubits: Iterable[int]) -> None:
    for q in qubits:
        if not 0 <= q < n:
            raise IndexOutOfRange(f"qubit {q} out of range for a {n}-qubit circuit")


def append_gate(c: Circuit, g: Gate, targets: Sequence[int] | int) -> Circuit:
    """Return a copy of ``c`` with ``g`` applied to ``targets``."""
    if isinstance(targets, (int, np.integer)):
        targets = (int(targets),)
    targets = tuple(int(t) for t in targets)
    if len(targets) != g.num_targets:
        raise ArityMismatch(f"gate {g.name!r} acts on {g.num_targets} qubit(s), got {len(targets)}")
    _check_qubits(c.num_qubits, targets + g.controls)
    if len(set(targets + g.controls)) != len(targets) + len(g.controls):
        raise DuplicateTarget(f"targets {targets} and controls {g.controls} overlap")
    return c._with_ops(c.ops + (Instruction(g, targets),))


def invert_circuit(c: Circuit) -> Circuit:
    """Reverse the operation order and replace each gate by its adjoint."""
    if c.has_measurements():
        raise ContainsMeasurement("cannot invert a circuit that measures")
    ops = []
    for op in reversed(c.ops):
        if isinstance(op, Instruction):
            ops.append(Instruction(op.gate.adjoint(), op.targets))
        else:
            ops.append(op)
    return c._with_ops(ops)


def embed_operator(local: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Lift a ``2^k`` operator on ``qubits`` (first = least significant) to ``2^n``."""
    k = len(qubits)
    dim = 1 << num_qubits
    idx = np.arange(dim)
    local_in = np.zeros(dim, dtype=np.int64)
    rest = idx.copy()
    for pos, q in enumerate(qubits):
        bit = (idx >> q) & 1
        local_in |= bit << pos
        rest &= ~(1 << q)
    out = np.zeros((dim, dim), dtype=complex)
    for l_out in range(1 << k):
        row = rest.copy()
        for pos, q in enumerate(qubits):
            row |= ((l_out >> pos) & 1) << q
        out[row, idx] = local[l_out, local_in]
    return out


def instruction_operator(inst: Instruction, num_qubits: int) -> np.ndarray:
    return embed_operator(gate_matrix(inst.gate), inst.targets + inst.gate.controls, num_qubits)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Full unitary of a measurement-free circuit, built by explicit matrix products."""
    if c.has_measurements():
        raise ContainsMeasurement("circuit_unitary needs a measurement-free circuit")
    if c.num_qubits > MAX_UNITARY_QUBITS:
        raise TooLarge(f"{c.num_qubits} qubits exceeds the {MAX_UNITARY_QUBITS}-qubit limit")
    total = np.eye(1 << c.num_qubits, dtype=complex)
    for inst in c.instructions:
        total = instruction_operator(inst, c.num_qubits) @ total
    return total


def measured_qubits(c: Circuit) -> list[int]:
    """Measured qubits ordered by classical bit, the last write to each clbit winning."""
    by_clbit: dict[int, int] = {}
    for op in c.ops:
        if isinstance(op, Measure):
            by_clbit[op.clbit] = op.qubit
    return [by_clbit[k] for k in sorted(by_clbit)]


# JSON: {"qubits": N, "clbits": M, "registers": {...}, "ops": [...]}

def _gate_to_json(inst: Instruction) -> dict:
    g = inst.gate
    out = {
        "gate": "c" * len(g.controls) + g.name,
        "params": list(g.params),
        "controls": list(g.controls),
        "targets": list(inst.targets),
    }
    if g.matrix is not None:
        out["matrix"] = matrix_to_json(g.matrix)
    return out


def circuit_to_json(c: Circuit) -> dict:
    ops = []
    for op in c.ops:
        if isinstance(op, Instruction):
            ops.append(_gate_to_json(op))
        elif isinstance(op, Barrier):
            ops.append({"barrier": op.label})
        else:
            ops.append({"measure": {"q": op.qubit, "c": op.clbit}})
    return {
        "qubits": c.num_qubits,
        "clbits": c.num_clbits,
        "registers": {name: list(qs) for name, qs in c.registers},
        "ops": ops,
    }


def circuit_from_json(obj: dict) -> Circuit:
    regs = tuple((name, tuple(qs)) for name, qs in obj.get("registers", {}).items())
    c = Circuit(int(obj["qubits"]), int(obj.get("clbits", 0)), (), regs)
    for op in obj["ops"]:
        if "barrier" in op:
            c = c.barrier(op["barrier"])
        elif "measure" in op:
            c = c.measure(int(op["measure"]["q"]), int(op["measure"]["c"]))
        else:
            controls = tuple(op.get("controls", ()))
            name = op["gate"]
            prefix = "c" * len(controls)
            if not name.startswith(prefix) or name[len(prefix):] not in _PARAM_COUNT:
                raise InvalidParameter(f"gate {name!r} inconsistent with {len(controls)} controls")
            matrix = matrix_from_json(op["matrix"]) if "matrix" in op else None
            g = Gate(name[len(prefix):], tuple(op.get("params", ())), controls, matrix)
            c = append_gate(c, g, op["targets"])
    return c
