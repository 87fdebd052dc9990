import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import fidelity
from hhllab.circuit import Circuit, Gate, RY, U, X, append_gate, base_matrix, circuit_unitary
from hhllab.errors import (
    DimensionMismatch,
    InvalidC,
    InvalidParameter,
    NonSquareInput,
    NotNormalized,
    NotPowerOfTwo,
    SingularMatrix,
    ZeroRHS,
)
from hhllab.hhl import (
    build_eigeninversion,
    build_hhl_circuit,
    build_one_hot_inversion,
    choose_clock,
    expected_success_probability,
    preprocess,
    prepare_state,
    problem_from_json,
    problem_to_json,
    random_exact_instance,
    result_to_json,
    run_hhl,
    verify_solution,
    worked_example,
)
from hhllab.linalg import hermitian_eigendecompose, matrix_exponential_i
from hhllab.qft import iqft_on, qft_on
from hhllab.statevector import StateVector, run_ideal


@pytest.fixture(scope="module")
def example():
    return preprocess(*worked_example())


@pytest.fixture(scope="module")
def example_result(example):
    return run_hhl(example)


# --- preprocessing ----------------------------------------------------------

def test_worked_example_parameters(example):
    assert example.n_clock == 2
    assert example.t == pytest.approx(math.pi / 2, abs=1e-12)
    assert example.C == 1.0
    assert example.exact and not example.embedded and not example.signed
    np.testing.assert_allclose(example.lambda_tilde, [1, 2], atol=1e-12)


def test_preprocess_input_errors():
    with pytest.raises(ZeroRHS):
        preprocess(np.eye(2), [0, 0])
    with pytest.raises(SingularMatrix):
        preprocess([[1, 1], [1, 1]], [1, 0])
    with pytest.raises(SingularMatrix):
        # nilpotent input: the embedded matrix inherits its zero singular value
        preprocess([[0, 1], [0, 0]], [1, 0])
    with pytest.raises(NonSquareInput):
        preprocess(np.ones((2, 3)), [1, 0])
    with pytest.raises(DimensionMismatch):
        preprocess(np.eye(2), [1, 0, 0])
    with pytest.raises(InvalidC):
        preprocess(*worked_example(), C=1.5)
    with pytest.raises(InvalidC):
        preprocess(*worked_example(), C=-1)


def test_rhs_is_normalised_and_norm_kept():
    p = preprocess(np.eye(2), [3, 4])
    np.testing.assert_allclose(p.b, [0.6, 0.8])
    assert p.b_norm == pytest.approx(5.0)


def test_clock_choice_uses_rational_gcd():
    # {3, 6} scale to {1, 2}
    n, t, exact = choose_clock(np.array([3.0, 6.0]))
    assert (n, exact) == (2, True)
    np.testing.assert_allclose(4 * np.array([3.0, 6.0]) * t / (2 * math.pi), [1, 2], atol=1e-12)
    n, t, exact = choose_clock(np.array([0.5, 1.25]))
    assert exact and np.allclose(2**n * np.array([0.5, 1.25]) * t / (2 * math.pi), [2, 5])
    # given t and n_clock that make the spectrum integral
    assert choose_clock(np.array([1.0, 2.0]), 3, 2 * math.pi / 8) == (3, 2 * math.pi / 8, True)


def test_irrational_spectrum_falls_back_with_warning():
    a = np.diag([1.0, math.sqrt(2)])
    with pytest.warns(UserWarning, match="approximate"):
        p = preprocess(a, [1, 1])
    assert not p.exact and p.n_clock == 4
    assert p.lambda_tilde.max() == pytest.approx(15.0)
    assert p.C <= p.lambda_tilde.min()


def test_non_power_of_two_is_padded():
    a = np.diag([1.0, 2.0, 3.0])
    b = np.array([1.0, 1.0, 1.0])
    p = preprocess(a, b)
    assert p.A.shape == (4, 4) and p.b[3] == 0
    r = run_hhl(p)
    assert r.direction.shape == (3,)
    np.testing.assert_allclose(r.rescaled_solution, [1, 0.5, 1 / 3], atol=1e-9)


@pytest.mark.parametrize("a", [
    np.array([[0.0, 2.0], [1.0, 0.0]]),
    np.array([[2.0, 0.0], [0.0, 1j]]),
])
def test_non_hermitian_input_is_embedded(a):
    b = np.array([1.0, 1.0])
    p = preprocess(a, b)
    assert p.embedded and p.exact and p.A.shape == (4, 4)
    np.testing.assert_allclose(p.b, [1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])
    r = run_hhl(p)
    # oracle: the original system solved directly, and the embedded system's second block
    x = np.linalg.solve(a, b)
    np.testing.assert_allclose(r.rescaled_solution, x, atol=1e-9)
    y = np.linalg.solve(p.A, np.concatenate([b, [0, 0]]))
    np.testing.assert_allclose(y[2:], x, atol=1e-12)


def test_embedding_with_irrational_singular_values_is_approximate():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.warns(UserWarning):
        p = preprocess(a, [1, 1])
    r = run_hhl(p)
    rep = verify_solution(p, r)
    assert r.direction.shape == (2,)
    assert rep.cosine_similarity > 0.9


def test_negative_eigenvalues_use_twos_complement():
    a = np.diag([1.0, -2.0])
    b = np.array([1.0, 1.0]) / math.sqrt(2)
    p = preprocess(a, b)
    assert p.signed and p.exact
    r = run_hhl(p)
    np.testing.assert_allclose(r.rescaled_solution, [1 / math.sqrt(2), -1 / (2 * math.sqrt(2))], atol=1e-9)


# --- state preparation ------------------------------------------------------

def test_prepare_basis_states():
    c = prepare_state([0, 1])
    assert len(c.instructions) == 1 and c.instructions[0].gate.name == "x"
    assert len(prepare_state([1, 0]).instructions) == 0
    state, _ = run_ideal(prepare_state([1 / 2] * 4))
    assert fidelity(state.amplitudes, [1 / 2] * 4) >= 1 - 1e-10


@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.booleans())
def test_prepare_state_reaches_target(k, seed, sparse):
    r = np.random.default_rng(seed)
    v = r.normal(size=2**k) + 1j * r.normal(size=2**k)
    if sparse:
        v[r.random(2**k) < 0.5] = 0
        if not np.any(v):
            v[0] = 1
    v /= np.linalg.norm(v)
    state, _ = run_ideal(prepare_state(v))
    np.testing.assert_allclose(state.amplitudes, v, atol=1e-10)


def test_prepare_state_errors():
    with pytest.raises(NotNormalized):
        prepare_state([1, 1])
    with pytest.raises(NotPowerOfTwo):
        prepare_state([1, 0, 0])


# --- eigenvalue inversion ---------------------------------------------------

def test_inversion_angles_for_two_clock_qubits():
    c = build_eigeninversion(2, 1.0)
    angles = sorted(op.gate.params[0] for op in c.instructions if op.gate.name == "ry")
    np.testing.assert_allclose(angles, [2 * math.asin(1 / 3), math.pi / 3, math.pi], atol=1e-15)


@pytest.mark.parametrize("n,C", [(2, 1.0), (3, 1.0), (3, 2.0), (4, 3.0)])
def test_inversion_maps_each_clock_value(n, C):
    u = circuit_unitary(build_eigeninversion(n, C))
    for m in range(2**n):
        col = u[:, m << 1]
        one = col[(m << 1) | 1]
        expected = C / m if m and C <= m else 0.0
        assert one == pytest.approx(expected, abs=1e-12)
        assert abs(col[m << 1]) ** 2 + abs(one) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_inversion_quarter_amplitude():
    # n = 3, C = 1, m = 4 gives angle 2 asin(1/4) = 0.5053605102841573
    u = circuit_unitary(build_eigeninversion(3, 1.0))
    assert u[(4 << 1) | 1, 4 << 1] == pytest.approx(0.25, abs=1e-12)
    assert 2 * math.asin(0.25) == pytest.approx(0.5053605102841573, abs=1e-15)


def test_full_rotation_when_m_equals_c():
    u = circuit_unitary(build_eigeninversion(2, 2.0))
    assert abs(u[(2 << 1) | 1, 2 << 1]) == pytest.approx(1.0, abs=1e-15)


def test_signed_inversion_flips_sign():
    u = circuit_unitary(build_eigeninversion(3, 1.0, signed=True))
    # clock 7 reads as -1 in two's complement
    assert u[(7 << 1) | 1, 7 << 1] == pytest.approx(-1.0, abs=1e-12)


def test_inversion_errors():
    with pytest.raises(InvalidC):
        build_eigeninversion(2, 0.0)
    with pytest.raises(InvalidParameter):
        build_eigeninversion(0, 1.0)


def test_one_hot_and_multiplexed_agree_on_worked_example(example, example_result):
    phi4 = example_result.snapshots["phi4"].amplitudes
    n = example.num_qubits
    full = [0, *example.clock_qubits]

    def lifted(rot):
        c = Circuit(n).compose(rot, full)
        state, _ = run_ideal(c, StateVector(phi4, n))
        return state.amplitudes

    np.testing.assert_allclose(
        lifted(build_one_hot_inversion(2, 1.0)), lifted(build_eigeninversion(2, 1.0)), atol=1e-12
    )
    other = run_hhl(example, inversion="one_hot")
    np.testing.assert_allclose(other.rescaled_solution, example_result.rescaled_solution, atol=1e-12)


# --- full pipeline ----------------------------------------------------------

def test_circuit_layout_and_barriers(example):
    c = build_hhl_circuit(example)
    labels = [op.label for op in c.ops if type(op).__name__ == "Barrier"]
    assert labels == [f"phi{k}" for k in range(1, 10)]
    assert c.register_map == {"ancilla": (0,), "clock": (1, 2), "b": (3,)}
    assert c.num_clbits == 2


def test_worked_example_statevector(example, example_result):
    r = example_result
    np.testing.assert_allclose(r.rescaled_solution, [-0.25, 0.75], atol=1e-9)
    assert r.success_probability == pytest.approx(5 / 8, abs=1e-12)
    assert r.ratio_11_01 == pytest.approx(9.0, abs=1e-9)
    assert np.linalg.norm(r.direction) == pytest.approx(1.0, abs=1e-10)
    assert r.outcome_probabilities["11"] == pytest.approx(9 / 16, abs=1e-12)
    assert r.outcome_probabilities["01"] == pytest.approx(1 / 16, abs=1e-12)


def test_phi6_matches_postselected_form(example_result):
    # after the rotation the ancilla-1 branch is -1/sqrt2 |u1>|01> + 1/(2 sqrt2) |u2>|10>
    amps = example_result.snapshots["phi6"].amplitudes
    r = 1 / math.sqrt(2)
    u1, u2 = np.array([r, -r]), np.array([r, r])
    expected = np.zeros(16, dtype=complex)
    for bi in range(2):
        expected[1 | (1 << 1) | (bi << 3)] = -r * u1[bi]
        expected[1 | (2 << 1) | (bi << 3)] = r / 2 * u2[bi]
    branch = amps * (np.arange(16) & 1)
    assert fidelity(branch, expected) == pytest.approx(1.0, abs=1e-12)
    assert np.vdot(branch, branch).real == pytest.approx(5 / 8, abs=1e-12)


def test_clock_returns_to_zero(example_result):
    amps = example_result.snapshots["phi9"].amplitudes
    clock_nonzero = ((np.arange(16) >> 1) & 3) != 0
    assert np.sum(np.abs(amps[clock_nonzero]) ** 2) <= 1e-9


def test_identity_system_returns_b():
    b = np.array([0.6, 0.8j])
    p = preprocess(np.eye(2), b)
    r = run_hhl(p)
    assert fidelity(r.direction, b) >= 1 - 1e-9
    assert verify_solution(p, r).residual <= 1e-10


def test_diagonal_system_direction():
    p = preprocess(np.diag([1.0, 2.0]), np.array([1, 1]) / math.sqrt(2))
    r = run_hhl(p)
    target = np.array([1, 0.5]) / np.linalg.norm([1, 0.5])
    assert fidelity(r.direction, target) >= 1 - 1e-12


def test_shot_mode(example):
    r = run_hhl(example, "shots", shots=4096, seed=42)
    assert r.histogram.shots == 4096 and sum(r.histogram.counts.values()) == 4096
    assert 7.5 <= r.ratio_11_01 <= 10.5
    assert r.rescaled_solution is None
    assert np.all(r.direction.real >= 0)
    again = run_hhl(example, "shots", shots=4096, seed=42)
    assert again.histogram.counts == r.histogram.counts


def test_shot_marginals_converge(example, example_result):
    shots = 20000
    r = run_hhl(example, "shots", shots=shots, seed=5)
    for key, p in example_result.outcome_probabilities.items():
        k = r.histogram.counts.get(key, 0)
        assert abs(k - shots * p) <= 5 * math.sqrt(shots * p * (1 - p)) + 1


def test_unknown_mode(example):
    with pytest.raises(InvalidParameter):
        run_hhl(example, "magic")
    with pytest.raises(InvalidParameter):
        build_hhl_circuit(example, inversion="magic")


def test_verify_worked_example(example, example_result):
    rep = verify_solution(example, example_result)
    assert rep.residual <= 1e-9
    assert rep.cosine_similarity >= 1 - 1e-9
    np.testing.assert_allclose(rep.classical_solution, [-0.25, 0.75], atol=1e-14)


@pytest.mark.parametrize("seed", range(25))
def test_random_exact_instances(seed):
    r = np.random.default_rng(seed)
    dim = int(r.choice([2, 4]))
    a, b, n, t = random_exact_instance(dim, 3, r)
    p = preprocess(a, b, n_clock=n, t=t)
    assert p.exact
    res = run_hhl(p)
    rep = verify_solution(p, res)
    assert rep.cosine_similarity >= 1 - 1e-9
    assert rep.residual <= 1e-8
    assert res.success_probability == pytest.approx(expected_success_probability(p), abs=1e-9)


def test_literal_cu_angles_give_conjugated_unitary(example):
    # The hand-fitted U(pi/2, -pi/2, pi/2, 3pi/4) has the off-diagonal signs flipped
    # relative to e^{iAt}; it equals Z e^{iAt} Z.
    lit1 = base_matrix(U(math.pi / 2, -math.pi / 2, math.pi / 2, 3 * math.pi / 4))
    lit2 = base_matrix(U(math.pi, math.pi, 0, 0))
    z = np.diag([1, -1])
    true1 = matrix_exponential_i(example.A, math.pi / 2)
    np.testing.assert_allclose(lit1, 0.5 * np.array([[-1 + 1j, 1 + 1j], [1 + 1j, -1 + 1j]]), atol=1e-15)
    np.testing.assert_allclose(lit1, z @ true1 @ z, atol=1e-12)
    np.testing.assert_allclose(lit2, z @ (true1 @ true1) @ z, atol=1e-12)
    # That system is Z A Z, whose solution is (1/4, 3/4): same squared ratio 1:9, opposite sign.
    c = append_gate(Circuit(4, 0), X(), 3)
    for q in (1, 2):
        c = append_gate(c, Gate("h"), q)
    c = append_gate(c, Gate("u", (math.pi / 2, -math.pi / 2, math.pi / 2, 3 * math.pi / 4), (1,)), 3)
    c = append_gate(c, Gate("u", (math.pi, math.pi, 0, 0), (2,)), 3)
    c = iqft_on(c, (1, 2), swap_first=False)
    c = append_gate(c, RY(math.pi, 1), 0)
    c = append_gate(c, RY(math.pi / 3, 2), 0)
    c = qft_on(c, (1, 2), swap_first=True)
    c = append_gate(c, Gate("u", (-math.pi, 0, -math.pi, 0), (2,)), 3)
    c = append_gate(c, Gate("u", (-math.pi / 2, -math.pi / 2, math.pi / 2, -3 * math.pi / 4), (1,)), 3)
    for q in (1, 2):
        c = append_gate(c, Gate("h"), q)
    state, _ = run_ideal(c)
    amps = state.amplitudes
    x = np.array([amps[1], amps[1 | 8]])
    assert fidelity(x, [0.25, 0.75]) == pytest.approx(1.0, abs=1e-12)
    assert abs(x[1]) ** 2 / abs(x[0]) ** 2 == pytest.approx(9.0, abs=1e-9)


def test_problem_and_result_json_round_trip(example, example_result, tmp_path):
    obj = json.loads(json.dumps(problem_to_json(example)))
    again = problem_from_json(obj)
    assert again.n_clock == example.n_clock and again.C == example.C
    plain = problem_from_json({"A": [[1.5, 0.5], [0.5, 1.5]], "b": [0, 1]})
    np.testing.assert_allclose(plain.A, example.A)
    out = result_to_json(example, example_result, verify_solution(example, example_result))
    text = json.dumps(out)
    assert json.loads(text)["verification"]["residual"] <= 1e-9
    with pytest.raises(InvalidParameter):
        problem_from_json({"A": [[1]]})


def test_zero_clock_branch_is_skipped():
    # every clock value m >= 1 has a rotation, m = 0 none
    c = build_eigeninversion(1, 1.0)
    assert len(c.instructions) == 1
    u = circuit_unitary(c)
    np.testing.assert_allclose(u[:, 0], [1, 0, 0, 0], atol=1e-15)


def test_eigen_overlap_formula_matches_worked_example(example):
    assert expected_success_probability(example) == pytest.approx(5 / 8, abs=1e-12)
    eig = hermitian_eigendecompose(example.A)
    np.testing.assert_allclose(eig.vectors.conj().T @ example.b, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-12)
