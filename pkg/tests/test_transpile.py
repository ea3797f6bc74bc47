import json

import numpy as np
import pytest

from cvqec import (
    Circuit,
    FIVE_QUBIT_SIGN_ASSIGNMENT,
    GridSpec,
    QubitCircuit,
    QubitCircuitError,
    QubitGate,
    build_braunstein5,
    builtin_five_qubit_circuit,
    direct_encoded_state,
    emit_cv_circuit,
    encode,
    enumerate_valid_assignments,
    fidelity,
    parse_qubit_circuit,
    substitute,
)
from cvqec.transpile import candidate_code, first_layer_xor_indices, parity_covariant


def test_parse_empty_circuit():
    qc = parse_qubit_circuit('{"qubit_count": 2, "gates": []}')
    assert qc.qubit_count == 2 and qc.gates == ()


def test_parse_fixture_roundtrip():
    qc = builtin_five_qubit_circuit()
    text = json.dumps({
        "qubit_count": 5,
        "gates": [{"type": g.kind, "qubits": list(g.qubits)} for g in qc.gates],
    })
    assert parse_qubit_circuit(text) == qc
    assert len(qc.xor_indices()) == 7


def test_parse_rejects_unknown_gate_with_location():
    text = '{"qubit_count": 2, "gates": [{"type": "H", "qubits": [0]}, {"type": "CZ", "qubits": [0, 1]}]}'
    with pytest.raises(QubitCircuitError, match="gate 1"):
        parse_qubit_circuit(text)


def test_parse_rejects_bad_indices_and_shape():
    with pytest.raises(QubitCircuitError):
        parse_qubit_circuit('{"qubit_count": 2, "gates": [{"type": "XOR", "qubits": [0, 5]}]}')
    with pytest.raises(QubitCircuitError):
        parse_qubit_circuit('{"qubit_count": 2, "gates": [{"type": "XOR", "qubits": [1, 1]}]}')
    with pytest.raises(QubitCircuitError):
        parse_qubit_circuit("not json")
    with pytest.raises(QubitCircuitError):
        parse_qubit_circuit('{"gates": []}')


def test_substitution_maps_gate_for_gate():
    qc = QubitCircuit(2, (QubitGate("H", (0,)), QubitGate("Hinv", (1,)),
                          QubitGate("XOR", (0, 1))))
    circ = substitute(qc, [False])
    assert [g.kind for g in circ.gates] == ["F", "Finv", "Sum"]
    circ = substitute(qc, [True])
    assert [g.kind for g in circ.gates] == ["F", "Finv", "SumInv"]
    assert [g.modes for g in circ.gates] == [(0,), (1,), (0, 1)]
    with pytest.raises(QubitCircuitError):
        substitute(qc, [True, False])


def test_substitution_preserves_counts():
    qc = builtin_five_qubit_circuit()
    circ = substitute(qc, FIVE_QUBIT_SIGN_ASSIGNMENT)
    counts = circ.gate_counts()
    n_h = sum(1 for g in qc.gates if g.kind in ("H", "Hinv"))
    assert counts["F"] + counts["Finv"] == n_h
    assert circ.sum_type_count() == 7
    assert len(circ.gates) == len(qc.gates)


def test_fixture_with_stored_assignment_equals_builtin_encoder():
    circ = substitute(builtin_five_qubit_circuit(), FIVE_QUBIT_SIGN_ASSIGNMENT)
    assert circ == build_braunstein5().encoder


def test_first_layer_detection():
    qc = builtin_five_qubit_circuit()
    assert first_layer_xor_indices(qc) == [0, 1, 4]


def test_parity_filter_accepts_both_first_layer_choices():
    # flipping a first-layer gate keeps the code parity covariant, which is
    # why those bits are frozen rather than enumerated
    qc = builtin_five_qubit_circuit()
    for first_bits in ((False, False, False), (True, False, False), (True, True, True)):
        assignment = list(FIVE_QUBIT_SIGN_ASSIGNMENT)
        for slot, bit in zip((0, 1, 2), first_bits):
            assignment[slot] = bit
        code = candidate_code(qc, assignment)
        assert parity_covariant(code, grid_n=8)


def test_enumeration_of_the_fixture():
    verdicts = enumerate_valid_assignments(builtin_five_qubit_circuit(), grid_n=8)
    assert len(verdicts) == 16
    # fixed bits stay Sum in every candidate
    for v in verdicts:
        assert v.assignment[0] is False and v.assignment[1] is False
        assert v.assignment[2] is False
    valid = [v for v in verdicts if v.valid]
    assert valid, "no valid assignment found"
    assert any(v.assignment == FIVE_QUBIT_SIGN_ASSIGNMENT for v in valid)
    # any invalid candidate must fail on the last-two-mode pair
    for v in verdicts:
        if not v.valid:
            assert (3, 4) in v.report.failing_pairs()


def test_enumeration_is_deterministic():
    a = enumerate_valid_assignments(builtin_five_qubit_circuit(), grid_n=8)
    b = enumerate_valid_assignments(builtin_five_qubit_circuit(), grid_n=8)
    assert [v.assignment for v in a] == [v.assignment for v in b]
    assert [v.valid for v in a] == [v.valid for v in b]
    assert [v.report.to_json() for v in a] == [v.report.to_json() for v in b]


def test_every_valid_candidate_encodes_a_working_code():
    # spot-check: every valid assignment's encoder is unitary on the grid and
    # keeps encoded eigenstates orthogonal
    verdicts = enumerate_valid_assignments(builtin_five_qubit_circuit(), grid_n=8)
    grid = GridSpec(8, 1)
    psi_a = np.zeros(8, dtype=complex)
    psi_a[2] = 1.0
    psi_b = np.zeros(8, dtype=complex)
    psi_b[5] = 1.0
    for v in [x for x in verdicts if x.valid][:4]:
        code = candidate_code(builtin_five_qubit_circuit(), v.assignment)
        ea = encode(psi_a, code, grid)
        eb = encode(psi_b, code, grid)
        assert abs(ea.norm() - 1) < 1e-12
        assert fidelity(ea, eb) < 1e-10


def test_degenerate_toy_circuit():
    qc = QubitCircuit(2, (QubitGate("XOR", (0, 1)),))
    verdicts = enumerate_valid_assignments(qc, grid_n=8)
    # the single XOR is first-layer, so there is nothing to enumerate
    assert len(verdicts) == 1
    v = verdicts[0]
    assert v.degenerate
    assert v.valid  # vacuously: no correctable-error structure to violate
    assert not v.report.all_pass


def test_emit_roundtrips_and_matches_closed_form():
    qc = builtin_five_qubit_circuit()
    text = emit_cv_circuit(qc, FIVE_QUBIT_SIGN_ASSIGNMENT)
    circ = Circuit.from_json(text)
    assert circ.sum_type_count() == 7
    assert circ == substitute(qc, FIVE_QUBIT_SIGN_ASSIGNMENT)
    # the emitted encoder reproduces the closed-form encoded state
    code = build_braunstein5()
    grid = GridSpec(8, 5)
    psi = np.zeros(8, dtype=complex)
    psi[6] = 1.0
    from cvqec import apply_circuit, state_from_wavefunctions

    zero = np.zeros(8, dtype=complex)
    zero[4] = 1.0
    full = state_from_wavefunctions(grid, [psi, zero, zero, zero, zero])
    out = apply_circuit(full, circ)
    assert fidelity(out, direct_encoded_state(code, grid, 6)) >= 1 - 1e-10


def test_emitted_repetition_fixture_loads_and_matches_builtin():
    qc = QubitCircuit(3, (QubitGate("XOR", (0, 1)), QubitGate("XOR", (0, 2))))
    text = emit_cv_circuit(qc, [False, False])
    from cvqec import build_repetition3

    assert Circuit.from_json(text) == build_repetition3().encoder
