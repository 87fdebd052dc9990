"""Density-matrix execution with Kraus noise channels.

An n-qubit density matrix is kept as a flat vector of ``4^n`` entries, which
is ``rho.reshape(-1)`` in row-major order: bits ``0..n-1`` index the column
and bits ``n..2n-1`` the row.  ``U rho U^H`` is then ``U`` on the row qubits
and ``conj(U)`` on the column qubits, both applied by the ordinary
state-vector kernel, and Kraus operators go through the same path.

Noise placement:
    * after every gate, amplitude damping and pure dephasing on each qubit the
      gate touches, with ``dt`` the gate duration;
    * after every two-qubit gate, a two-qubit depolarizing channel with
      parameter ``p_2q`` (a k-qubit depolarizing channel for k > 2);
    * readout confusion on the final outcome probabilities.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .circuit import Barrier, Circuit, Instruction, Measure, base_matrix, measured_qubits
from .errors import DimensionMismatch, InvalidParameter, TooLarge, UnphysicalModel
from .statevector import apply_matrix, qubit_probabilities, render_bits, run_ideal, sample_distribution

MAX_DENSITY_QUBITS = 8
KRAUS_ATOL = 1e-12

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A mixed state on ``num_qubits`` qubits.

    ``trace_drift`` is the largest ``|tr(rho) - 1|`` seen while the state was
    being evolved (zero for states built directly).
    """

    entries: np.ndarray
    num_qubits: int
    trace_drift: float = 0.0

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        dim = 1 << self.num_qubits
        if rho.shape != (dim, dim):
            raise DimensionMismatch(f"expected {dim}x{dim}, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise UnphysicalModel("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise UnphysicalModel(f"trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < -1e-8:
            raise UnphysicalModel("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_statevector(cls, amps) -> "DensityMatrix":
        v = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()), v.size.bit_length() - 1)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map given by its Kraus operators; completeness is checked on construction."""

    name: str
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        dim = self.operators[0].shape[0]
        total = sum(k.conj().T @ k for k in self.operators)
        err = float(np.max(np.abs(total - np.eye(dim))))
        if err > KRAUS_ATOL:
            raise UnphysicalModel(f"{self.name}: sum K^H K deviates from I by {err:.2e}")

    @property
    def num_qubits(self) -> int:
        return self.operators[0].shape[0].bit_length() - 1

    def completeness_error(self) -> float:
        dim = self.operators[0].shape[0]
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(dim))))


@lru_cache(maxsize=None)
def depolarizing(p: float, k: int = 2) -> KrausChannel:
    """``rho -> (1 - p) rho + p I / 2^k`` as ``4^k`` Pauli Kraus operators."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"depolarizing p = {p} outside [0, 1]")
    d2 = 4 ** k
    ops = []
    for labels in itertools.product(range(4), repeat=k):
        # labels[0] acts on the most significant local qubit
        m = np.array([[1.0 + 0j]])
        for lab in labels:
            m = np.kron(m, _PAULI[lab])
        weight = 1.0 - p * (d2 - 1) / d2 if not any(labels) else p / d2
        if weight > 0:
            ops.append(math.sqrt(weight) * m)
    return KrausChannel(f"depolarizing({p:g},{k})", tuple(ops))


@lru_cache(maxsize=None)
def amplitude_damping(gamma: float) -> KrausChannel:
    if not 0.0 <= gamma <= 1.0:
        raise InvalidParameter(f"gamma = {gamma} outside [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel(f"amplitude_damping({gamma:g})", (k0, k1))


@lru_cache(maxsize=None)
def phase_damping(lam: float) -> KrausChannel:
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameter(f"lambda = {lam} outside [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - lam)]], dtype=complex)
    k1 = np.array([[0, 0], [0, math.sqrt(lam)]], dtype=complex)
    return KrausChannel(f"phase_damping({lam:g})", (k0, k1))


def projective_measurement() -> KrausChannel:
    return KrausChannel(
        "measure",
        (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)),
    )


def readout_matrix(flip: float) -> np.ndarray:
    """Symmetric confusion matrix with bit-flip probability ``flip``."""
    return np.array([[1 - flip, flip], [flip, 1 - flip]], dtype=float)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Gate-level noise parameters.

    Times are in microseconds; ``math.inf`` disables T1 or T2.  ``readout[i, j]``
    is the probability of reading ``j`` when the qubit is in ``i``, applied to
    every measured qubit.  Gates on two or more qubits take ``gate_time_2q``.
    """

    p_2q: float = 0.0
    t1: float = math.inf
    t2: float = math.inf
    gate_time_1q: float = 0.05
    gate_time_2q: float = 0.3
    readout: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        ro = np.asarray(self.readout, dtype=float)
        object.__setattr__(self, "readout", ro)
        if not 0.0 <= self.p_2q < 1.0:
            raise InvalidParameter(f"p_2q = {self.p_2q} outside [0, 1)")
        if self.t1 <= 0 or self.t2 <= 0:
            raise UnphysicalModel("T1 and T2 must be positive")
        if self.t2 > 2 * self.t1:
            raise UnphysicalModel(f"T2 = {self.t2} exceeds 2*T1 = {2 * self.t1}")
        if self.gate_time_1q < 0 or self.gate_time_2q < 0:
            raise InvalidParameter("gate times must be non-negative")
        if ro.shape != (2, 2) or np.any(ro < 0) or np.max(np.abs(ro.sum(axis=1) - 1)) > 1e-12:
            raise UnphysicalModel("readout must be a 2x2 row-stochastic matrix")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def transmon(cls, p_2q: float = 0.0) -> "NoiseModel":
        """T1 = 50 us, T2 = 70 us, symmetric 5% readout error."""
        return cls(p_2q=p_2q, t1=50.0, t2=70.0, readout=readout_matrix(0.05))

    def with_p2q(self, p_2q: float) -> "NoiseModel":
        return replace(self, p_2q=p_2q)

    def two_q_only(self) -> "NoiseModel":
        """Same depolarizing rate and gate times, no T1/T2 and perfect readout."""
        return replace(self, t1=math.inf, t2=math.inf, readout=np.eye(2))

    def gate_time(self, k: int) -> float:
        return self.gate_time_1q if k == 1 else self.gate_time_2q

    def damping_params(self, dt: float) -> tuple[float, float]:
        """``(gamma, lambda)`` for amplitude and pure-phase damping over ``dt``.

        ``gamma = 1 - exp(-dt/T1)``; the pure dephasing rate is
        ``1/T_phi = 1/T2 - 1/(2 T1)`` and ``lambda = 1 - exp(-2 dt / T_phi)``,
        so coherences decay as ``exp(-dt/T2)`` overall.
        """
        gamma = 1.0 - math.exp(-dt / self.t1)
        rate_phi = max(0.0, 1.0 / self.t2 - 1.0 / (2.0 * self.t1))
        lam = 1.0 - math.exp(-2.0 * dt * rate_phi)
        return gamma, lam

    def to_json(self) -> dict:
        def t(x):
            return None if math.isinf(x) else x

        return {
            "p_2q": self.p_2q,
            "t1_us": t(self.t1),
            "t2_us": t(self.t2),
            "gate_time_1q_us": self.gate_time_1q,
            "gate_time_2q_us": self.gate_time_2q,
            "readout": self.readout.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseModel":
        """Accepts ``readout`` (2x2 matrix) or ``readout_error`` (symmetric flip rate).

        Missing or null ``t1_us`` / ``t2_us`` mean no relaxation.
        """
        def t(key):
            v = obj.get(key)
            return math.inf if v is None else float(v)

        if "readout" in obj:
            ro = np.asarray(obj["readout"], dtype=float)
        else:
            ro = readout_matrix(float(obj.get("readout_error", 0.0)))
        return cls(
            p_2q=float(obj.get("p_2q", 0.0)),
            t1=t("t1_us"),
            t2=t("t2_us"),
            gate_time_1q=float(obj.get("gate_time_1q_us", 0.05)),
            gate_time_2q=float(obj.get("gate_time_2q_us", 0.3)),
            readout=ro,
        )

    @classmethod
    def load(cls, path) -> "NoiseModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def channels_for(m: NoiseModel, k: int) -> list[tuple[KrausChannel, str]]:
    """Channels applied after a gate on ``k`` qubits, tagged ``"joint"`` or ``"each"``."""
    out: list[tuple[KrausChannel, str]] = []
    if k >= 2 and m.p_2q > 0:
        out.append((depolarizing(m.p_2q, k), "joint"))
    gamma, lam = m.damping_params(m.gate_time(k))
    if gamma > 0:
        out.append((amplitude_damping(gamma), "each"))
    if lam > 0:
        out.append((phase_damping(lam), "each"))
    return out


def _apply_unitary(vec: np.ndarray, u: np.ndarray, targets, controls, n: int) -> np.ndarray:
    vec = apply_matrix(vec, u, [q + n for q in targets], 2 * n, [q + n for q in controls])
    return apply_matrix(vec, u.conj(), list(targets), 2 * n, list(controls))


def apply_channel(vec: np.ndarray, ch: KrausChannel, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply ``ch`` to ``qubits`` (least significant local qubit first) of a flat density matrix."""
    out = np.zeros_like(vec)
    for k in ch.operators:
        out += _apply_unitary(vec, k, qubits, (), n)
    return out


def _trace(vec: np.ndarray, n: int) -> float:
    return float(np.real(vec[:: (1 << n) + 1].sum()))


def run_noisy(
    c: Circuit,
    m: NoiseModel,
    initial: DensityMatrix | None = None,
    on_step: Callable[[np.ndarray], None] | None = None,
) -> DensityMatrix:
    """Evolve ``|0..0><0..0|`` through ``c`` under ``m``.

    Terminal measurements are left for the caller to read off the diagonal; a
    measurement followed by a gate on the same qubit dephases it.  ``on_step``
    is called with the current ``2^n x 2^n`` matrix after every channel.

    Raises:
        TooLarge: more than 8 qubits.
    """
    n = c.num_qubits
    if n > MAX_DENSITY_QUBITS:
        raise TooLarge(f"{n} qubits exceeds the density-matrix limit of {MAX_DENSITY_QUBITS}")
    dim = 1 << n
    if initial is None:
        vec = np.zeros(dim * dim, dtype=complex)
        vec[0] = 1.0
    else:
        vec = np.array(initial.entries, dtype=complex).reshape(-1)
    drift = 0.0

    def step(v):
        nonlocal drift
        drift = max(drift, abs(_trace(v, n) - 1.0))
        if on_step is not None:
            on_step(v.reshape(dim, dim))

    ops = c.ops
    for i, op in enumerate(ops):
        if isinstance(op, Instruction):
            g = op.gate
            vec = _apply_unitary(vec, base_matrix(g), op.targets, g.controls, n)
            qubits = op.qubits
            for ch, how in channels_for(m, len(qubits)):
                if how == "joint":
                    vec = apply_channel(vec, ch, sorted(qubits), n)
                else:
                    for q in qubits:
                        vec = apply_channel(vec, ch, [q], n)
                step(vec)
        elif isinstance(op, Measure):
            if any(isinstance(o, Instruction) and op.qubit in o.qubits for o in ops[i + 1:]):
                vec = apply_channel(vec, projective_measurement(), [op.qubit], n)
                step(vec)
        elif not isinstance(op, Barrier):  # pragma: no cover
            raise InvalidParameter(f"unknown op {op!r}")
    rho = vec.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, n, drift)


def apply_readout_error(probs, m: NoiseModel | np.ndarray, measured: Sequence[int] | int) -> np.ndarray:
    """Push an outcome distribution through the per-qubit confusion matrix.

    ``probs`` is indexed with the first measured qubit as the most significant
    bit; ``measured`` may be the list of qubits or just their count.
    """
    ro = m.readout if isinstance(m, NoiseModel) else np.asarray(m, dtype=float)
    width = measured if isinstance(measured, int) else len(measured)
    p = np.asarray(probs, dtype=float).reshape((2,) * width)
    for ax in range(width):
        p = np.moveaxis(np.tensordot(p, ro, axes=([ax], [0])), -1, ax)
    return p.reshape(-1)


# --- sweeps -----------------------------------------------------------------

MODES = ("2q_only", "full")
_MODE_ALIASES = {"two_q_only": "2q_only", "2q_only": "2q_only", "full": "full"}


@dataclass(frozen=True)
class SweepRow:
    p_2q: float
    mode: str
    probabilities: dict[str, float]

    def __getitem__(self, key: str) -> float:
        return self.probabilities.get(key, 0.0)


@dataclass
class SweepResult:
    """Outcome probabilities of the measured bits for each (mode, p_2q)."""

    rows: list[SweepRow]
    ideal: dict[str, float]
    width: int
    base: NoiseModel
    shots: int | None = None
    seed: int | None = None
    max_trace_drift: float = 0.0

    def keys(self) -> list[str]:
        return [render_bits(i, self.width) for i in range(1 << self.width)]

    def series(self, mode: str, key: str) -> list[float]:
        mode = _MODE_ALIASES[mode]
        return [r[key] for r in self.rows if r.mode == mode]

    def grid(self, mode: str) -> list[float]:
        mode = _MODE_ALIASES[mode]
        return [r.p_2q for r in self.rows if r.mode == mode]

    def to_csv(self) -> str:
        buf = io.StringIO()
        ideal = ",".join(f"P_{k}={self.ideal[k]:.12g}" for k in self.keys() if k.endswith("1"))
        buf.write(f"# ideal {ideal}\n")
        b = self.base
        buf.write(
            f"# gate_time_1q_us={b.gate_time_1q:.12g},gate_time_2q_us={b.gate_time_2q:.12g},"
            f"t1_us={b.t1:.12g},t2_us={b.t2:.12g},readout_error={b.readout[0, 1]:.12g},"
            f"shots={self.shots if self.shots else 'exact'}\n"
        )
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p_2q", "mode", *(f"P_{k}" for k in self.keys())])
        for r in self.rows:
            w.writerow([f"{r.p_2q:.12g}", r.mode, *(f"{r[k]:.12g}" for k in self.keys())])
        return buf.getvalue()


def noise_sweep(
    p,
    grid: Iterable[float],
    modes: Sequence[str] = MODES,
    shots: int | None = None,
    seed: int | None = 42,
    base: NoiseModel | None = None,
    inversion: str = "auto",
) -> SweepResult:
    """Outcome probabilities of the HHL circuit for ``p`` across depolarizing rates.

    ``2q_only`` keeps only the two-qubit depolarizing channel; ``full`` adds the
    T1/T2 damping and readout error of ``base`` (the transmon preset by default).
    With ``shots=None`` probabilities come straight from the density-matrix
    diagonal; otherwise they are frequencies from ``shots`` seeded samples.
    """
    from .hhl import build_hhl_circuit

    base = NoiseModel.transmon() if base is None else base
    c = build_hhl_circuit(p, inversion)
    measured = measured_qubits(c)
    width = len(measured)
    final, _ = run_ideal(c)
    ideal_dist = qubit_probabilities(final.probabilities(), measured, c.num_qubits)
    ideal = {render_bits(i, width): float(x) for i, x in enumerate(ideal_dist)}

    grid = [float(g) for g in grid]
    for g in grid:
        if not 0.0 <= g < 1.0:
            raise InvalidParameter(f"grid value {g} outside [0, 1)")
    rows: list[SweepRow] = []
    drift = 0.0
    for mode in modes:
        mode = _MODE_ALIASES.get(mode)
        if mode is None:
            raise InvalidParameter(f"unknown sweep mode; expected one of {MODES}")
        for g in grid:
            model = base.with_p2q(g)
            if mode == "2q_only":
                model = model.two_q_only()
            rho = run_noisy(c, model)
            drift = max(drift, rho.trace_drift)
            dist = qubit_probabilities(rho.probabilities(), measured, c.num_qubits)
            dist = apply_readout_error(dist, model, measured)
            dist = dist / dist.sum()
            if shots is not None:
                counts = sample_distribution(dist, shots, seed, width)
                probs = {render_bits(i, width): counts.get(render_bits(i, width), 0) / shots for i in range(1 << width)}
            else:
                probs = {render_bits(i, width): float(x) for i, x in enumerate(dist)}
            rows.append(SweepRow(g, mode, probs))
    return SweepResult(rows, ideal, width, base, shots, seed, drift)


def gnuplot_script(csv_name: str, result: SweepResult, key: str = "11") -> str:
    """A gnuplot script plotting ``P_key`` against ``p_2q`` for each mode, with the ideal line."""
    col = 3 + result.keys().index(key)
    lines = [
        'set datafile separator ","',
        "set xlabel 'two-qubit depolarizing probability'",
        f"set ylabel 'P({key})'",
        "set key top right",
        f"ideal = {result.ideal[key]:.12g}",
        "plot \\",
    ]
    parts = [
        f"  '{csv_name}' using 1:(strcol(2) eq '{mode}' ? ${col} : 1/0) with linespoints title '{mode}'"
        for mode in MODES
    ]
    parts.append("  ideal with lines dashtype 2 title 'ideal'")
    lines.append(", \\\n".join(parts))
    return "\n".join(lines) + "\n"
