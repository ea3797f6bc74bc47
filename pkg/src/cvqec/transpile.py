"""Qubit-to-wavepacket circuit substitution with automatic verification.

A qubit circuit over {H, H inverse, XOR} translates gate-for-gate into the
continuous gate set: Hadamard-type rotations become Fourier gates and each XOR
becomes either Sum or SumInv.  The XOR direction is genuinely ambiguous, so the
translator enumerates it: XORs whose target is a fresh zero-position ancilla
are fixed to Sum (either choice passes the parity filter there), and every
remaining XOR contributes one free bit.  Each candidate assignment is scored
with two filters:

* parity covariance on the grid: encoding the eigenstate at x must equal the
  per-mode parity image of encoding the eigenstate at -x, up to global phase;
* the displacement-correctability check of :func:`cvqec.symplectic.check_correctability`.

Candidates with no correctable structure at all (no mode passes injectivity,
as happens for toy circuits that build no code) are reported as degenerate
rather than invalid.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codes import CodeSpec, _make_code, encode, parity_permute
from .gates import Circuit, Gate
from .grid import GridSpec, fidelity
from .symplectic import CorrectabilityReport, check_correctability

QUBIT_GATE_KINDS = ("H", "Hinv", "XOR")


class QubitCircuitError(ValueError):
    """Malformed qubit-circuit description."""


@dataclass(frozen=True)
class QubitGate:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in QUBIT_GATE_KINDS:
            raise QubitCircuitError(f"unknown gate kind {self.kind!r}")
        want = 1 if self.kind in ("H", "Hinv") else 2
        if len(self.qubits) != want:
            raise QubitCircuitError(f"{self.kind} takes {want} qubit(s), got {self.qubits}")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise QubitCircuitError("control and target must differ")


@dataclass(frozen=True)
class QubitCircuit:
    qubit_count: int
    gates: tuple[QubitGate, ...]

    def __post_init__(self) -> None:
        for g in self.gates:
            if max(g.qubits) >= self.qubit_count or min(g.qubits) < 0:
                raise QubitCircuitError(f"gate {g} exceeds qubit count {self.qubit_count}")

    def xor_indices(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.kind == "XOR"]


def parse_qubit_circuit(text: str) -> QubitCircuit:
    """Parse the JSON circuit format (gate types "H", "Hinv", "XOR")."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QubitCircuitError(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "gates" not in payload:
        raise QubitCircuitError("circuit JSON must be an object with a 'gates' list")
    count_key = "qubit_count" if "qubit_count" in payload else "mode_count"
    if count_key not in payload:
        raise QubitCircuitError("missing qubit_count")
    gates = []
    for pos, entry in enumerate(payload["gates"]):
        try:
            kind = entry["type"]
            qubits = tuple(int(q) for q in entry.get("qubits", entry.get("modes", ())))
        except (KeyError, TypeError) as exc:
            raise QubitCircuitError(f"gate {pos}: malformed entry ({exc})") from exc
        try:
            gates.append(QubitGate(kind, qubits))
        except QubitCircuitError as exc:
            raise QubitCircuitError(f"gate {pos}: {exc}") from exc
    try:
        return QubitCircuit(int(payload[count_key]), tuple(gates))
    except QubitCircuitError as exc:
        raise QubitCircuitError(str(exc)) from exc


#: Built-in five-qubit encoder fixture.  Its three-qubit blocks are already
#: expanded into XOR pairs; substituting with the stored sign assignment
#: reproduces the five-mode encoder of :func:`cvqec.codes.build_braunstein5`.
FIVE_QUBIT_FIXTURE = QubitCircuit(
    5,
    (
        QubitGate("XOR", (0, 1)),
        QubitGate("XOR", (0, 2)),
        QubitGate("H", (0,)),
        QubitGate("H", (3,)),
        QubitGate("XOR", (3, 4)),
        QubitGate("H", (4,)),
        QubitGate("XOR", (4, 1)),
        QubitGate("XOR", (3, 2)),
        QubitGate("XOR", (0, 4)),
        QubitGate("XOR", (0, 3)),
    ),
)

#: Inverse-selection flags for the fixture's seven XORs, in circuit order.
#: True selects SumInv.  This is the assignment whose output matches the
#: five-mode closed form.
FIVE_QUBIT_SIGN_ASSIGNMENT: tuple[bool, ...] = (False, False, False, False, False, True, True)


def builtin_five_qubit_circuit() -> QubitCircuit:
    return FIVE_QUBIT_FIXTURE


def substitute(qc: QubitCircuit, assignment: Sequence[bool]) -> Circuit:
    """H -> F, Hinv -> Finv, XOR -> Sum or SumInv per assignment bit (True
    selects the inverse).  Gate order and count are preserved."""
    xor_count = len(qc.xor_indices())
    if len(assignment) != xor_count:
        raise QubitCircuitError(
            f"assignment length {len(assignment)} != XOR count {xor_count}"
        )
    bits = iter(assignment)
    gates = []
    for g in qc.gates:
        if g.kind == "H":
            gates.append(Gate("F", g.qubits))
        elif g.kind == "Hinv":
            gates.append(Gate("Finv", g.qubits))
        else:
            gates.append(Gate("SumInv" if next(bits) else "Sum", g.qubits))
    return Circuit(qc.qubit_count, tuple(gates))


def first_layer_xor_indices(qc: QubitCircuit) -> list[int]:
    """XORs whose target has not been touched by any earlier gate (a fresh
    zero-position ancilla once substituted)."""
    touched: set[int] = {0}  # the logical input mode is never a fresh ancilla
    out = []
    for i, g in enumerate(qc.gates):
        if g.kind == "XOR" and g.qubits[1] not in touched:
            out.append(i)
        touched.update(g.qubits)
    return out


@dataclass
class AssignmentVerdict:
    assignment: tuple[bool, ...]
    report: CorrectabilityReport
    parity_ok: bool
    degenerate: bool

    @property
    def valid(self) -> bool:
        return self.parity_ok and (self.report.all_pass or self.degenerate)


def candidate_code(qc: QubitCircuit, assignment: Sequence[bool]) -> CodeSpec:
    """CodeSpec for one substitution candidate (nullifiers kept in raw form if
    no measurement-friendly basis exists)."""
    encoder = substitute(qc, assignment)
    try:
        return _make_code("candidate", encoder)
    except ValueError:
        # fall back to raw nullifiers; rank checks do not need the friendly basis
        from .symplectic import derive_nullifiers
        from types import SimpleNamespace

        m = encoder.mode_count
        skeleton = SimpleNamespace(
            mode_count=m, encoder=encoder, logical_mode=0,
            ancilla_modes=tuple(range(1, m)),
        )
        raw = derive_nullifiers(skeleton)
        counts = encoder.gate_counts()
        return CodeSpec(
            name="candidate",
            mode_count=m,
            encoder=encoder,
            logical_mode=0,
            ancilla_modes=tuple(range(1, m)),
            nullifiers=tuple(raw),
            raw_nullifiers=tuple(raw),
            metadata={"gate_counts": counts},
        )


def parity_covariant(code: CodeSpec, grid_n: int = 8, tol: float = 1e-9) -> bool:
    """Grid reading of the parity filter: for every eigenstate index j,
    parity(encode|x_j>) must match encode|x_{-j}> up to global phase."""
    grid = GridSpec(grid_n, 1)
    for j in range(grid_n):
        psi = np.zeros(grid_n, dtype=np.complex128)
        psi[j] = 1.0
        left = parity_permute(encode(psi, code, grid))
        psi2 = np.zeros(grid_n, dtype=np.complex128)
        psi2[(grid_n - j) % grid_n] = 1.0
        right = encode(psi2, code, grid)
        if fidelity(left, right) < 1 - tol:
            return False
    return True


def enumerate_valid_assignments(
    qc: QubitCircuit, grid_n: int = 8
) -> list[AssignmentVerdict]:
    """Fix first-layer XORs to Sum, enumerate the rest, and score every
    candidate with the parity and correctability filters.  Deterministic:
    candidates are emitted in lexicographic bit order (False = Sum first)."""
    xors = qc.xor_indices()
    fixed = set(first_layer_xor_indices(qc))
    free = [i for i in xors if i not in fixed]
    verdicts = []
    for bits in itertools.product((False, True), repeat=len(free)):
        by_index = dict(zip(free, bits))
        assignment = tuple(by_index.get(i, False) for i in xors)
        code = candidate_code(qc, assignment)
        report = check_correctability(code)
        degenerate = not any(report.mode_injective)
        parity_ok = parity_covariant(code, grid_n)
        verdicts.append(AssignmentVerdict(assignment, report, parity_ok, degenerate))
    return verdicts


def emit_cv_circuit(qc: QubitCircuit, assignment: Sequence[bool]) -> str:
    """Serialized JSON of the substituted circuit; round-trips through
    :meth:`cvqec.gates.Circuit.from_json`."""
    return substitute(qc, assignment).to_json()
