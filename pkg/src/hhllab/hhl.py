"""End-to-end HHL: preprocessing, circuit assembly, execution and read-out.

Register layout (little-endian qubit indices)::

    q0                      ancilla
    q1 .. q_n               clock register, q1 least significant
    q_{n+1} .. q_{n+n_b}    b / solution register, q_{n+1} least significant

Measured bits are rendered with the b register first (most significant bit
leftmost) followed by the ancilla, so for a single b qubit ``"11"`` means
b = 1 and ancilla = 1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .circuit import (
    Circuit,
    H,
    RY,
    U,
    X,
    Gate,
    append_gate,
    base_matrix,
    measured_qubits,
)
from .errors import (
    DimensionMismatch,
    InvalidC,
    InvalidParameter,
    NonSquareInput,
    NotNormalized,
    NotPowerOfTwo,
    PostselectionFailed,
    SingularMatrix,
    ZeroRHS,
)
from .linalg import (
    EigenDecomposition,
    as_matrix,
    as_vector,
    hermitian_eigendecompose,
    hermitian_embedding,
    is_hermitian,
    matrix_from_json,
    matrix_power_via_eigen,
    matrix_to_json,
    solve_linear_reference,
    vector_from_json,
    vector_to_json,
)
from .qft import QPESpec, check_qpe_spec, iqft_on, qft_on
from .statevector import (
    ShotHistogram,
    postselect,
    qubit_probabilities,
    render_bits,
    run_ideal,
    sample_distribution,
)

MAX_CLOCK = 8
FALLBACK_CLOCK = 4
INTEGRAL_ATOL = 1e-9


def worked_example() -> tuple[np.ndarray, np.ndarray]:
    """The 2x2 system ``[[3/2, 1/2], [1/2, 3/2]] x = (0, 1)`` with solution ``(-1/4, 3/4)``."""
    return np.array([[1.5, 0.5], [0.5, 1.5]], dtype=complex), np.array([0, 1], dtype=complex)


@dataclass(frozen=True, eq=False)
class HHLProblem:
    """A linear system prepared for HHL.

    ``A`` and ``b`` are the Hermitian, power-of-two sized matrix and the unit
    right-hand side actually loaded into the circuit.  ``A_original`` and
    ``b_original`` are kept for rescaling and verification.
    """

    A: np.ndarray
    b: np.ndarray
    n_clock: int
    t: float
    C: float
    A_original: np.ndarray
    b_original: np.ndarray
    eig: EigenDecomposition
    lambda_tilde: np.ndarray
    exact: bool
    signed: bool
    embedded: bool = False

    @property
    def n_b(self) -> int:
        return self.A.shape[0].bit_length() - 1

    @property
    def b_norm(self) -> float:
        return float(np.linalg.norm(self.b_original))

    @property
    def num_qubits(self) -> int:
        return 1 + self.n_clock + self.n_b

    @property
    def ancilla(self) -> int:
        return 0

    @property
    def clock_qubits(self) -> tuple[int, ...]:
        return tuple(range(1, 1 + self.n_clock))

    @property
    def b_qubits(self) -> tuple[int, ...]:
        return tuple(range(1 + self.n_clock, 1 + self.n_clock + self.n_b))

    def extract(self, vec: np.ndarray) -> np.ndarray:
        """Map a vector on the loaded register back to the original unknowns."""
        n = self.A_original.shape[0]
        if self.embedded:
            return vec[n:2 * n]
        return vec[:n]

    def qpe_spec(self) -> QPESpec:
        return QPESpec(
            self.n_clock,
            lambda j: matrix_power_via_eigen(self.eig, self.t, 2 ** j),
            self.clock_qubits,
            self.b_qubits,
            self.num_qubits,
        )


def _rational_gcd(values: np.ndarray, max_den: int = 64) -> float | None:
    fracs = []
    for v in values:
        f = Fraction(float(v)).limit_denominator(max_den)
        if abs(float(f) - v) > INTEGRAL_ATOL * max(1.0, abs(v)):
            return None
        if f != 0:
            fracs.append(abs(f))
    if not fracs:
        return None
    num = reduce(math.gcd, (f.numerator for f in fracs))
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fracs))
    return num / den


def _capacity(n: int, signed: bool) -> int:
    return 2 ** (n - 1) - 1 if signed else 2 ** n - 1


def _is_exact(lt: np.ndarray, n: int, signed: bool) -> bool:
    r = np.round(lt)
    return bool(
        np.all(np.abs(lt - r) <= INTEGRAL_ATOL)
        and np.all(np.abs(r) >= 1)
        and np.max(np.abs(r)) <= _capacity(n, signed)
    )


def choose_clock(
    values: np.ndarray, n_clock: int | None = None, t: float | None = None
) -> tuple[int, float, bool]:
    """Pick ``(n_clock, t, exact)`` so that every rescaled eigenvalue is an integer.

    Without a user ``t``, eigenvalues are divided by their rational GCD and the
    smallest clock size (up to 8) that holds the largest quotient is used.
    Otherwise the rescaled eigenvalues are kept as close to the top of the
    clock range as possible and the result is flagged approximate.  Negative
    eigenvalues are stored in two's complement, halving the usable range.
    """
    values = np.asarray(values, dtype=float)
    signed = bool(np.any(values < 0))
    sizes = [n_clock] if n_clock is not None else list(range(1, MAX_CLOCK + 1))
    if t is None:
        g = _rational_gcd(values)
        if g is not None:
            top = float(np.max(np.abs(values)) / g)
            for n in sizes:
                if _capacity(n, signed) >= 1 and round(top) <= _capacity(n, signed):
                    return n, 2 * math.pi / (g * 2 ** n), True
    else:
        for n in sizes:
            if _capacity(n, signed) >= 1 and _is_exact(2 ** n * values * t / (2 * math.pi), n, signed):
                return n, float(t), True
    n = n_clock if n_clock is not None else FALLBACK_CLOCK
    if t is None:
        t = 2 * math.pi * _capacity(n, signed) / (2 ** n * float(np.max(np.abs(values))))
    return n, float(t), False


def preprocess(
    A_raw,
    b_raw,
    n_clock: int | None = None,
    t: float | None = None,
    C: float | None = None,
) -> HHLProblem:
    """Turn ``A x = b`` into an :class:`HHLProblem`.

    Non-Hermitian ``A`` is replaced by ``[[0, A], [A^H, 0]]`` with ``b`` padded
    by zeros (the solution then sits in the second block).  Sizes that are not
    a power of two are padded with a diagonal block repeating an existing
    eigenvalue, so the spectrum the clock has to resolve is unchanged.

    Raises:
        ZeroRHS: ``b`` is the zero vector.
        SingularMatrix: some eigenvalue is below ``1e-12`` times the largest.
        InvalidC: ``C`` is not in ``(0, min |lambda_tilde|]``.
    """
    A0 = as_matrix(A_raw)
    if A0.shape[0] != A0.shape[1]:
        raise NonSquareInput(f"A is {A0.shape[0]}x{A0.shape[1]}")
    b0 = as_vector(b_raw)
    if b0.shape[0] != A0.shape[0]:
        raise DimensionMismatch(f"A is {A0.shape[0]}x{A0.shape[0]}, b has length {b0.shape[0]}")
    bn = float(np.linalg.norm(b0))
    if bn == 0.0:
        raise ZeroRHS("right-hand side is zero")

    embedded = not is_hermitian(A0)
    if embedded:
        A = hermitian_embedding(A0)
        b = np.concatenate([b0, np.zeros_like(b0)])
    else:
        A = 0.5 * (A0 + A0.conj().T)
        b = b0.copy()
    eig = hermitian_eigendecompose(A)
    mags = np.abs(eig.values)
    if mags.max() == 0.0 or mags.min() <= 1e-12 * mags.max():
        raise SingularMatrix("A has a (numerically) zero eigenvalue")

    dim = A.shape[0]
    full = 1 << max(1, (dim - 1).bit_length())
    if full != dim:
        fill = eig.values[int(np.argmax(mags))]
        A = np.block([
            [A, np.zeros((dim, full - dim))],
            [np.zeros((full - dim, dim)), fill * np.eye(full - dim)],
        ]).astype(complex)
        b = np.concatenate([b, np.zeros(full - dim, dtype=complex)])
        eig = hermitian_eigendecompose(A)

    n, t_used, exact = choose_clock(eig.values, n_clock, t)
    lam_tilde = 2 ** n * eig.values * t_used / (2 * math.pi)
    signed = bool(np.any(eig.values < 0))
    if not exact:
        warnings.warn(
            "eigenvalues are not exactly representable in the clock register; "
            "phase estimation is approximate",
            stacklevel=2,
        )
    smallest = float(np.min(np.abs(lam_tilde)))
    if C is None:
        C = float(np.round(smallest)) if exact else max(1.0, math.floor(smallest))
    C = float(C)
    if C <= 0:
        raise InvalidC(f"C must be positive, got {C}")
    if C > smallest + INTEGRAL_ATOL:
        raise InvalidC(f"C = {C} exceeds the smallest rescaled eigenvalue {smallest:.6g}")

    return HHLProblem(
        A=A,
        b=b / bn,
        n_clock=n,
        t=t_used,
        C=C,
        A_original=A0,
        b_original=b0,
        eig=eig,
        lambda_tilde=lam_tilde,
        exact=exact,
        signed=signed,
        embedded=embedded,
    )


def expected_success_probability(p: HHLProblem) -> float:
    """Ancilla-1 probability ``sum_j |b_j C / lambda_tilde_j|^2`` from the eigendecomposition."""
    coeffs = p.eig.vectors.conj().T @ p.b
    return float(np.sum(np.abs(coeffs * p.C / p.lambda_tilde) ** 2))


# --- circuit pieces -------------------------------------------------------

def _append_x(ops: list, q: int) -> None:
    # cancel against an earlier bare X on q when nothing in between touches q
    for i in range(len(ops) - 1, -1, -1):
        g, targets = ops[i]
        if q in targets or q in g.controls:
            if g.name == "x" and not g.controls and targets == (q,):
                del ops[i]
                return
            break
    ops.append((X(), (q,)))


def _append_pattern_gate(ops: list, gate: Gate, target: Sequence[int], controls: Sequence[int], pattern: int) -> None:
    # Controlled gate firing when the controls read ``pattern`` (controls[0] = LSB).
    flips = [q for k, q in enumerate(controls) if not (pattern >> k) & 1]
    for q in flips:
        _append_x(ops, q)
    ops.append((gate.with_controls(controls), tuple(target)))
    for q in flips:
        _append_x(ops, q)


def _ops_to_circuit(n: int, ops: list) -> Circuit:
    c = Circuit(n)
    for g, targets in ops:
        c = append_gate(c, g, targets)
    return c


def prepare_state(v) -> Circuit:
    """Circuit mapping ``|0...0>`` to ``v`` by recursive multiplexed rotations.

    The most significant qubit is rotated first; each lower qubit gets one
    rotation per pattern of the qubits above it.  Magnitudes are set with RY,
    and the least significant qubit carries the phases through U gates.  Gates
    whose action on the fresh ``|0>`` target is trivial are dropped, and one
    that sends ``|0>`` to ``|1>`` becomes an X.
    """
    v = as_vector(v)
    dim = v.size
    k = dim.bit_length() - 1
    if dim < 2 or dim != 1 << k:
        raise NotPowerOfTwo(f"state of length {dim} is not a power of two >= 2")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-10:
        raise NotNormalized(f"|v| = {norm!r}")

    ops: list = []
    idx = np.arange(dim)
    for q in range(k - 1, -1, -1):
        controls = list(range(q + 1, k))
        for pattern in range(1 << len(controls)):
            prefix = pattern << (q + 1)
            sel = (idx >> (q + 1)) == pattern
            zero = v[sel & (((idx >> q) & 1) == 0)]
            one = v[sel & (((idx >> q) & 1) == 1)]
            n0, n1 = float(np.linalg.norm(zero)), float(np.linalg.norm(one))
            if n0 + n1 <= 1e-14:
                continue
            theta = 2.0 * math.atan2(n1, n0)
            if q > 0:
                gate = RY(theta)
            else:
                a, b = v[prefix], v[prefix | 1]
                gamma = float(np.angle(a)) if abs(a) > 1e-14 else 0.0
                phi = (float(np.angle(b)) - gamma) if abs(b) > 1e-14 else 0.0
                gate = U(theta, phi, math.pi, gamma)
            col = base_matrix(gate)[:, 0]
            if abs(col[0] - 1) <= 1e-12:
                continue
            if abs(col[1] - 1) <= 1e-12:
                gate = X()
            _append_pattern_gate(ops, gate, (q,), controls, pattern)
    return _ops_to_circuit(k, ops)


def rotation_angle(m: int, C: float) -> float:
    return 2.0 * math.asin(max(-1.0, min(1.0, C / m)))


def build_eigeninversion(n_clock: int, C: float, signed: bool = False) -> Circuit:
    """Ancilla rotation ``|m>|0> -> |m>(sqrt(1 - C^2/m^2)|0> + C/m |1>)``.

    The circuit acts on ``n_clock + 1`` qubits: the ancilla is qubit 0 and the
    clock register qubits ``1..n_clock``.  Each clock value ``m`` with
    ``|C/m| <= 1`` gets its own RY(2 arcsin(C/m)) controlled on the whole clock
    register; ``m = 0`` is left alone.  With ``signed`` the clock is read in
    two's complement so negative eigenvalues get negative amplitudes.
    """
    if n_clock < 1:
        raise InvalidParameter("n_clock must be >= 1")
    if C <= 0:
        raise InvalidC(f"C must be positive, got {C}")
    clock = list(range(1, n_clock + 1))
    ops: list = []
    for m in range(1, 2 ** n_clock):
        value = m - 2 ** n_clock if signed and m >= 2 ** (n_clock - 1) else m
        if abs(C / value) > 1 + 1e-12:
            continue
        _append_pattern_gate(ops, RY(rotation_angle(value, C)), (0,), clock, m)
    return _ops_to_circuit(n_clock + 1, ops)


def build_one_hot_inversion(n_clock: int, C: float) -> Circuit:
    """Per-qubit controlled RY(2 arcsin(C / 2^j)) on the ancilla.

    Only correct when every eigenvalue is encoded as a single set clock bit.
    """
    c = Circuit(n_clock + 1)
    for j in range(n_clock):
        if C / 2 ** j <= 1:
            c = append_gate(c, RY(rotation_angle(2 ** j, C), j + 1), 0)
    return c


def one_hot_valid(p: HHLProblem) -> bool:
    """True when every rescaled eigenvalue is an exact power of two."""
    if not p.exact or p.signed:
        return False
    vals = np.round(p.lambda_tilde).astype(int)
    return bool(np.all((vals > 0) & ((vals & (vals - 1)) == 0)))


def build_hhl_circuit(p: HHLProblem, inversion: str = "multiplexed") -> Circuit:
    """Full HHL circuit with barriers ``phi1`` .. ``phi9`` between stages.

    ``phi5`` follows the ancilla rotation and ``phi6`` marks where the ancilla
    would be measured; the measurement itself is deferred to the end, next to
    the b-register measurement.  ``inversion="one_hot"`` swaps in the
    per-clock-qubit rotations, and ``"auto"`` uses them whenever they are
    exact (all rescaled eigenvalues powers of two), which keeps every gate on
    at most two qubits.
    """
    if inversion == "auto":
        inversion = "one_hot" if one_hot_valid(p) else "multiplexed"
    n, nb = p.n_clock, p.n_b
    regs = (("ancilla", (0,)), ("clock", p.clock_qubits), ("b", p.b_qubits))
    c = Circuit(p.num_qubits, nb + 1, (), regs)
    c = c.compose(prepare_state(p.b), list(p.b_qubits))
    c = c.barrier("phi1")

    spec = p.qpe_spec()
    mats = check_qpe_spec(spec)
    for q in p.clock_qubits:
        c = append_gate(c, H(), q)
    c = c.barrier("phi2")
    for j, m in enumerate(mats):
        c = append_gate(c, Gate("unitary", (), (p.clock_qubits[j],), m), p.b_qubits)
    c = c.barrier("phi3")
    c = iqft_on(c, p.clock_qubits, swap_first=False)
    c = c.barrier("phi4")

    if inversion == "multiplexed":
        rot = build_eigeninversion(n, p.C, p.signed)
    elif inversion == "one_hot":
        rot = build_one_hot_inversion(n, p.C)
    else:
        raise InvalidParameter(f"unknown inversion {inversion!r}")
    c = c.compose(rot, [0, *p.clock_qubits])
    c = c.barrier("phi5")
    c = c.barrier("phi6")

    c = qft_on(c, p.clock_qubits, swap_first=True)
    c = c.barrier("phi7")
    for j in range(n - 1, -1, -1):
        c = append_gate(c, Gate("unitary", (), (p.clock_qubits[j],), mats[j].conj().T), p.b_qubits)
    c = c.barrier("phi8")
    for q in p.clock_qubits:
        c = append_gate(c, H(), q)
    c = c.barrier("phi9")

    for k, q in enumerate(p.b_qubits):
        c = c.measure(q, nb - 1 - k)
    return c.measure(0, nb)


# --- execution ------------------------------------------------------------

@dataclass
class HHLResult:
    """Output of :func:`run_hhl`.

    ``direction`` is the unit solution direction in the original unknowns.  In
    shot modes it holds magnitudes only and ``rescaled_solution`` is None.
    """

    mode: str
    success_probability: float
    direction: np.ndarray
    rescaled_solution: np.ndarray | None
    outcome_probabilities: dict[str, float]
    histogram: ShotHistogram | None = None
    ratio_11_01: float | None = None
    snapshots: dict = field(default_factory=dict, repr=False)


def _ratio(probs: dict[str, float], nb: int) -> float | None:
    if nb != 1:
        return None
    lo, hi = probs.get("01", 0.0), probs.get("11", 0.0)
    return hi / lo if lo > 0 else math.inf


def rescale(p: HHLProblem, direction: np.ndarray) -> np.ndarray:
    """Scale ``direction`` by the complex ``s`` minimising ``|A (s d) - b|``."""
    ad = p.A_original @ direction
    denom = float(np.vdot(ad, ad).real)
    s = np.vdot(ad, p.b_original) / denom
    return s * direction


def _outcome_distribution(p: HHLProblem, probs: np.ndarray, c: Circuit) -> np.ndarray:
    return qubit_probabilities(probs, measured_qubits(c), p.num_qubits)


def _keyed(dist: np.ndarray, width: int) -> dict[str, float]:
    return {render_bits(i, width): float(x) for i, x in enumerate(dist)}


def _shot_result(p: HHLProblem, mode: str, dist: np.ndarray, shots: int, seed: int | None) -> HHLResult:
    width = p.n_b + 1
    counts = sample_distribution(dist, shots, seed, width)
    hist = ShotHistogram(counts, shots, seed, tuple(range(width)))
    good = {k[:-1]: v for k, v in counts.items() if k.endswith("1")}
    total_good = sum(good.values())
    if total_good == 0:
        raise PostselectionFailed("no shot had the ancilla in |1>")
    mags = np.array([good.get(render_bits(i, p.n_b), 0) for i in range(2 ** p.n_b)], dtype=float)
    direction = p.extract(np.sqrt(mags / total_good).astype(complex))
    direction = direction / np.linalg.norm(direction)
    freqs = {k: v / shots for k, v in counts.items()}
    return HHLResult(
        mode=mode,
        success_probability=total_good / shots,
        direction=direction,
        rescaled_solution=None,
        outcome_probabilities=_keyed(dist, width),
        histogram=hist,
        ratio_11_01=_ratio(freqs, p.n_b),
    )


def run_hhl(
    p: HHLProblem,
    mode: str = "statevector",
    shots: int = 4096,
    seed: int | None = 42,
    noise=None,
    inversion: str = "multiplexed",
) -> HHLResult:
    """Run the HHL circuit for ``p``.

    Modes:
        ``statevector``: exact amplitudes; the ancilla-1, clock-0 branch of the
            b register gives the signed direction.
        ``shots``: ``shots`` samples of the (b, ancilla) bits from the ideal state.
        ``noisy``: density-matrix run under ``noise`` (a NoiseModel), readout
            error applied, then ``shots`` samples.
    """
    c = build_hhl_circuit(p, inversion)
    width = p.n_b + 1
    if mode == "noisy":
        from .noise import NoiseModel, apply_readout_error, run_noisy

        model = noise if noise is not None else NoiseModel.ideal()
        rho = run_noisy(c, model)
        dist = _outcome_distribution(p, np.real(np.diag(rho.entries)), c)
        dist = apply_readout_error(dist, model, measured_qubits(c))
        return _shot_result(p, mode, dist, shots, seed)

    final, snaps = run_ideal(c)
    dist = _outcome_distribution(p, final.probabilities(), c)
    if mode == "shots":
        res = _shot_result(p, mode, dist, shots, seed)
        res.snapshots = snaps
        return res
    if mode != "statevector":
        raise InvalidParameter(f"unknown mode {mode!r}")

    try:
        selected, prob = postselect(final, p.ancilla, 1)
    except Exception as exc:
        raise PostselectionFailed(str(exc)) from exc
    if prob < 1e-12:
        raise PostselectionFailed(f"success probability {prob:.3e}")
    amps = selected.amplitudes
    b_idx = np.arange(2 ** p.n_b)
    branch = amps[1 | (b_idx << (p.n_clock + 1))]
    direction = p.extract(branch)
    direction = direction / np.linalg.norm(direction)
    probs = _keyed(dist, width)
    return HHLResult(
        mode=mode,
        success_probability=prob,
        direction=direction,
        rescaled_solution=rescale(p, direction),
        outcome_probabilities=probs,
        ratio_11_01=_ratio(probs, p.n_b),
        snapshots=snaps,
    )


@dataclass(frozen=True)
class VerificationReport:
    residual: float
    cosine_similarity: float
    classical_solution: np.ndarray


def verify_solution(p: HHLProblem, r: HHLResult) -> VerificationReport:
    """Compare an HHL result with the Gaussian-elimination solution of the original system."""
    x_ref = solve_linear_reference(p.A_original, p.b_original)
    if r.rescaled_solution is not None:
        resid = np.linalg.norm(p.A_original @ r.rescaled_solution - p.b_original) / p.b_norm
    else:
        resid = math.nan
    ref_dir = x_ref / np.linalg.norm(x_ref)
    cos = abs(np.vdot(r.direction, ref_dir))
    return VerificationReport(float(resid), float(cos), x_ref)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_exact_instance(
    dim: int, n_clock: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, int, float]:
    """Hermitian ``A`` with integer eigenvalues in ``[1, 2^n_clock)`` and a random ``b``.

    Returns ``(A, b, n_clock, t)`` with ``t = 2 pi / 2^n_clock`` so the clock
    reads the eigenvalues themselves.
    """
    lam = rng.integers(1, 2 ** n_clock, size=dim).astype(float)
    v = random_unitary(dim, rng)
    A = (v * lam) @ v.conj().T
    A = 0.5 * (A + A.conj().T)
    b = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return A, b, n_clock, 2 * math.pi / 2 ** n_clock


# --- file formats -----------------------------------------------------------

def _matrix_in(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return matrix_from_json(obj)
    return as_matrix(obj)


def problem_from_json(obj: dict) -> HHLProblem:
    """Build a problem from ``{"A": ..., "b": ..., "n_clock"?, "t"?, "C"?}``.

    ``A`` may be a nested list of reals or the ``{"rows", "cols", "re", "im"}``
    form; ``b`` a list or the matching vector form.
    """
    try:
        A, b = obj["A"], obj["b"]
    except KeyError as exc:
        raise InvalidParameter(f"problem file is missing {exc.args[0]!r}") from None
    n_clock = obj.get("n_clock")
    return preprocess(
        _matrix_in(A),
        vector_from_json(b),
        n_clock=None if n_clock is None else int(n_clock),
        t=obj.get("t"),
        C=obj.get("C"),
    )


def load_problem(path) -> HHLProblem:
    with open(path, encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))


def problem_to_json(p: HHLProblem) -> dict:
    return {
        "A": matrix_to_json(p.A_original),
        "b": vector_to_json(p.b_original),
        "n_clock": p.n_clock,
        "t": p.t,
        "C": p.C,
    }


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def result_to_json(p: HHLProblem, r: HHLResult, report: VerificationReport | None = None) -> dict:
    out = {
        "problem": problem_to_json(p),
        "exact_clock": p.exact,
        "embedded": p.embedded,
        "lambda_tilde": [float(x) for x in p.lambda_tilde],
        "mode": r.mode,
        "success_probability": r.success_probability,
        "direction": vector_to_json(r.direction),
        "rescaled_solution": None if r.rescaled_solution is None else vector_to_json(r.rescaled_solution),
        "outcome_probabilities": r.outcome_probabilities,
        "ratio_11_01": _finite(r.ratio_11_01),
        "histogram": None if r.histogram is None else {
            "shots": r.histogram.shots,
            "seed": r.histogram.seed,
            "counts": dict(sorted(r.histogram.counts.items())),
        },
    }
    if report is not None:
        out["classical_solution"] = vector_to_json(report.classical_solution)
        out["verification"] = {
            "residual": _finite(report.residual),
            "cosine_similarity": report.cosine_similarity,
        }
    return out
