"""Gate conventions, state containers, and the dense linear-algebra helpers."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qfilter.errors import (
    DimError,
    HermiticityError,
    NormError,
    ShapeError,
    UnsupportedGate,
    WeightError,
    ZeroVectorError,
)
from qfilter.quantum import (
    DensityMatrix,
    GateSpec,
    StateVector,
    UnitaryMatrix,
    apply_channel,
    apply_gate,
    basis_state,
    gate_array,
    gate_matrix,
    hs_distance,
    mixture,
    overlap,
    project_qubit,
    pure_to_density,
    random_cptp,
    random_density,
    random_state,
    tensor,
    trace_norm,
    zero_state,
)

angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)


@given(angles)
def test_rotation_gates_match_exponential_form(theta):
    for kind in ("Rx", "Ry", "Rz", "ZZ", "CRx"):
        np.testing.assert_allclose(
            gate_array(kind, theta), oracles.oracle_gate(kind, theta), atol=1e-12
        )


def test_fixed_gates_match_reference():
    for kind in ("H", "X", "CSWAP"):
        np.testing.assert_allclose(gate_array(kind), oracles.oracle_gate(kind), atol=0)


def test_gate_matrix_validates_unitarity():
    u = gate_matrix("Rx", 0.7)
    assert u.n_qubits == 1
    with pytest.raises(NormError):
        UnitaryMatrix(np.array([[1, 0], [0, 2]], dtype=complex), 1)


def test_unknown_gate_kind_rejected():
    with pytest.raises(UnsupportedGate):
        gate_array("Toffoli")
    with pytest.raises(UnsupportedGate):
        GateSpec("Toffoli", (0, 1, 2))


def test_gate_spec_arity_and_angle_rules():
    with pytest.raises(ShapeError):
        GateSpec("Rx", (0, 1), angle=0.1)
    with pytest.raises(ValueError):
        GateSpec("CRx", (1, 1), angle=0.1)  # duplicate targets
    with pytest.raises(ValueError):
        GateSpec("Rx", (0,))  # parametric without a source
    with pytest.raises(ValueError):
        GateSpec("Rx", (0,), param_index=0, angle=0.5)  # both sources
    with pytest.raises(ValueError):
        GateSpec("H", (0,), angle=0.5)  # non-parametric with an angle
    spec = GateSpec("Rx", (0,), param_index=2)
    assert spec.resolve_angle(np.array([0.0, 0.0, 0.4])) == 0.4
    assert GateSpec("Rx", (0,), angle=-0.3).resolve_angle(None) == -0.3


def test_qubit_zero_is_most_significant():
    # X on qubit 0 of |00> lands on basis index 2, not 1
    out = apply_gate(zero_state(2), GateSpec("X", (0,)))
    np.testing.assert_allclose(out.amplitudes, [0, 0, 1, 0], atol=0)
    out = apply_gate(zero_state(2), GateSpec("X", (1,)))
    np.testing.assert_allclose(out.amplitudes, [0, 1, 0, 0], atol=0)


def test_crx_control_is_first_target():
    # control |0>: nothing happens to the target
    out = apply_gate(zero_state(2), GateSpec("CRx", (0, 1), angle=np.pi))
    np.testing.assert_allclose(out.amplitudes, [1, 0, 0, 0], atol=1e-15)
    # control |1>: Rx(pi) flips the target up to a phase of -i
    start = basis_state(2, 2)
    out = apply_gate(start, GateSpec("CRx", (0, 1), angle=np.pi))
    np.testing.assert_allclose(out.amplitudes, [0, 0, 0, -1j], atol=1e-12)


def test_cswap_control_is_first_target():
    out = apply_gate(basis_state(3, 0b101), GateSpec("CSWAP", (0, 1, 2)))
    np.testing.assert_allclose(out.amplitudes, np.eye(8)[0b110], atol=0)
    out = apply_gate(basis_state(3, 0b001), GateSpec("CSWAP", (0, 1, 2)))
    np.testing.assert_allclose(out.amplitudes, np.eye(8)[0b001], atol=0)


@settings(deadline=None, max_examples=60)
@given(
    st.integers(min_value=1, max_value=4),
    st.sampled_from(["Rx", "Ry", "Rz", "H", "X", "ZZ", "CRx", "CSWAP"]),
    angles,
    st.integers(min_value=0, max_value=10_000),
)
def test_apply_gate_matches_dense_lift(n, kind, theta, seed):
    from qfilter.quantum import GATE_ARITY

    k = GATE_ARITY[kind]
    if k > n:
        n = k
    rng = np.random.default_rng(seed)
    targets = tuple(rng.permutation(n)[:k].tolist())
    state = random_state(seed, n)
    spec = (
        GateSpec(kind, targets, angle=theta)
        if kind in ("Rx", "Ry", "Rz", "ZZ", "CRx")
        else GateSpec(kind, targets)
    )
    got = apply_gate(state, spec).amplitudes
    want = oracles.lift(oracles.oracle_gate(kind, theta), targets, n) @ state.amplitudes
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_apply_gate_rejects_out_of_range_target():
    with pytest.raises(IndexError):
        apply_gate(zero_state(1), GateSpec("H", (1,)))


def test_state_vector_validation_and_helpers():
    with pytest.raises(DimError):
        StateVector(np.ones(3), 2)
    s = StateVector(np.array([3.0, 4.0]), 1)
    assert s.norm() == pytest.approx(5.0)
    np.testing.assert_allclose(s.normalized().amplitudes, [0.6, 0.8])
    np.testing.assert_allclose(s.probabilities(), [9.0, 16.0])
    with pytest.raises(ZeroVectorError):
        StateVector(np.zeros(2), 1).normalized()


def test_tensor_and_basis_states():
    left = basis_state(1, 1)
    right = zero_state(2)
    out = tensor(left, right)
    assert out.n_qubits == 3
    np.testing.assert_allclose(out.amplitudes, np.eye(8)[0b100], atol=0)


def test_project_qubit_probability_and_renormalization():
    state = apply_gate(zero_state(2), GateSpec("H", (0,)))
    kept, p = project_qubit(state, 0, 1)
    assert p == pytest.approx(0.5)
    np.testing.assert_allclose(kept.amplitudes, [0, 0, 1, 0], atol=1e-15)
    with pytest.raises(ZeroVectorError):
        project_qubit(zero_state(2), 0, 1)


def test_density_matrix_validation():
    with pytest.raises(HermiticityError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]), 1)
    with pytest.raises(NormError):
        DensityMatrix(np.eye(2), 1)  # trace 2
    with pytest.raises(NormError):
        DensityMatrix(np.diag([1.5, -0.5]), 1)  # negative eigenvalue
    with pytest.raises(DimError):
        DensityMatrix(np.eye(2) / 2, 2)
    rho = DensityMatrix(np.eye(2) / 2, 1)
    assert rho.purity() == pytest.approx(0.5)


def test_pure_to_density_requires_normalization():
    with pytest.raises(NormError):
        pure_to_density(StateVector(np.array([1.0, 1.0]), 1))
    rho = pure_to_density(StateVector(np.array([0.6, 0.8]), 1))
    assert rho.purity() == pytest.approx(1.0)


def test_mixture_weights_validation():
    states = [random_density(s, 1) for s in (1, 2)]
    mixed = mixture(states, np.array([0.25, 0.75]))
    np.testing.assert_allclose(
        mixed.entries, 0.25 * states[0].entries + 0.75 * states[1].entries
    )
    with pytest.raises(WeightError):
        mixture(states, np.array([0.5, 0.6]))
    with pytest.raises(WeightError):
        mixture(states, np.array([-0.5, 1.5]))
    with pytest.raises(DimError):
        mixture(states, np.array([1.0]))
    with pytest.raises(DimError):
        mixture([states[0], random_density(3, 2)], np.array([0.5, 0.5]))


@given(st.integers(min_value=0, max_value=5000), st.integers(min_value=0, max_value=5000))
@settings(deadline=None, max_examples=40)
def test_hs_distance_pure_state_closed_form(seed_a, seed_b):
    a = random_state(seed_a, 2)
    b = random_state(seed_b, 2)
    got = hs_distance(pure_to_density(a), pure_to_density(b))
    want = 2.0 * (1.0 - abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    assert got == pytest.approx(want, abs=1e-12)


def test_hs_distance_against_trace_oracle(rng):
    rho = random_density(7, 2)
    sigma = random_density(8, 2)
    assert hs_distance(rho, sigma) == pytest.approx(
        oracles.hs(rho.entries, sigma.entries), abs=1e-12
    )
    with pytest.raises(DimError):
        hs_distance(rho, random_density(9, 1))


def test_overlap_is_real_trace_of_product():
    rho = random_density(21, 2)
    sigma = random_density(22, 2)
    want = float(np.real(np.trace(rho.entries @ sigma.entries)))
    assert overlap(rho, sigma) == pytest.approx(want, abs=1e-12)
    assert overlap(rho, sigma) == pytest.approx(overlap(sigma, rho), abs=1e-12)


def test_trace_norm_known_values():
    assert trace_norm(np.diag([0.5, -0.5])) == pytest.approx(1.0)
    # difference of orthogonal pure states has trace norm 2
    diff = np.diag([1.0, -1.0])
    assert trace_norm(diff) == pytest.approx(2.0)
    with pytest.raises(HermiticityError):
        trace_norm(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(DimError):
        trace_norm(np.ones((2, 3)))


def test_trace_norm_pure_difference_closed_form():
    a = random_state(31, 1)
    b = random_state(32, 1)
    x = pure_to_density(a).entries - pure_to_density(b).entries
    want = 2.0 * np.sqrt(1.0 - abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    assert trace_norm(x) == pytest.approx(want, abs=1e-12)


def test_random_cptp_is_trace_preserving():
    for seed, dim, nk in [(0, 2, 1), (1, 3, 2), (2, 5, 4), (3, 8, 3)]:
        ops = random_cptp(seed, dim, nk)
        acc = sum(a.conj().T @ a for a in ops)
        np.testing.assert_allclose(acc, np.eye(dim), atol=1e-12)


def test_apply_channel_matches_kraus_sum(rng):
    ops = random_cptp(5, 4, 3)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    x = x + x.conj().T
    want = sum(a @ x @ a.conj().T for a in ops)
    np.testing.assert_allclose(apply_channel(ops, x), want, atol=1e-12)
    # trace preserved
    assert np.trace(apply_channel(ops, x)) == pytest.approx(np.trace(x), abs=1e-10)


@given(st.integers(min_value=0, max_value=2000))
@settings(deadline=None, max_examples=50)
def test_contractivity_property(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 9))
    ops = random_cptp(seed, dim, int(rng.integers(1, 5)))
    p1 = float(rng.uniform())
    rho = oracles_random_density(rng, dim)
    sigma = oracles_random_density(rng, dim)
    x = p1 * rho - (1 - p1) * sigma
    assert trace_norm(apply_channel(ops, x)) <= trace_norm(x) + 1e-10


def oracles_random_density(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


def test_random_state_and_density_are_valid_and_seeded():
    s1 = random_state(42, 3)
    s2 = random_state(42, 3)
    np.testing.assert_array_equal(s1.amplitudes, s2.amplitudes)
    assert s1.norm() == pytest.approx(1.0)
    r1 = random_density(42, 2)
    r2 = random_density(42, 2)
    np.testing.assert_array_equal(r1.entries, r2.entries)
    assert np.trace(r1.entries).real == pytest.approx(1.0)
