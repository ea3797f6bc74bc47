"""Gate set and circuit application for the grid engine.

Two primitive gates and their inverses act on the discretized modes:

* ``F`` (Fourier), the active rotation taking position to momentum eigenstates.
  On the grid it is the centered transform U[j, k] = (dx / sqrt(pi)) *
  exp(2i * x_j * x_k), applied along one tensor axis.  It satisfies F^4 = I and
  F^2 = per-mode parity (j -> (N - j) mod N) exactly.
* ``Sum`` (generalized XOR), adding the control's position into the target:
  basis index pair (j, k) -> (j, (k + j - N/2) mod N), i.e. x_t -> x_t + x_c
  with periodic wraparound.  ``SumInv`` is the inverse permutation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .grid import GridError, MultiModeState

GATE_KINDS = ("F", "Finv", "Sum", "SumInv")

_INVERSE = {"F": "Finv", "Finv": "F", "Sum": "SumInv", "SumInv": "Sum"}


class CircuitError(ValueError):
    """Malformed gate or circuit."""


@dataclass(frozen=True)
class Gate:
    kind: str
    modes: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        want = 1 if self.kind in ("F", "Finv") else 2
        if len(self.modes) != want:
            raise CircuitError(f"{self.kind} takes {want} mode(s), got {self.modes}")
        if want == 2 and self.modes[0] == self.modes[1]:
            raise CircuitError("control and target must differ")
        if any(m < 0 for m in self.modes):
            raise CircuitError("negative mode index")

    def inverse(self) -> "Gate":
        return Gate(_INVERSE[self.kind], self.modes)


def fourier(mode: int) -> Gate:
    return Gate("F", (mode,))


def fourier_inv(mode: int) -> Gate:
    return Gate("Finv", (mode,))


def sum_gate(control: int, target: int) -> Gate:
    return Gate("Sum", (control, target))


def sum_inv(control: int, target: int) -> Gate:
    return Gate("SumInv", (control, target))


@dataclass(frozen=True)
class Circuit:
    mode_count: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.modes) >= self.mode_count:
                raise CircuitError(f"gate {g} exceeds mode count {self.mode_count}")

    def inverse(self) -> "Circuit":
        return Circuit(self.mode_count, tuple(g.inverse() for g in reversed(self.gates)))

    def gate_counts(self) -> dict[str, int]:
        counts = {k: 0 for k in GATE_KINDS}
        for g in self.gates:
            counts[g.kind] += 1
        return counts

    def sum_type_count(self) -> int:
        c = self.gate_counts()
        return c["Sum"] + c["SumInv"]

    def to_json(self) -> str:
        payload = {
            "mode_count": self.mode_count,
            "gates": [{"type": g.kind, "modes": list(g.modes)} for g in self.gates],
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "Circuit":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CircuitError(f"invalid circuit JSON: {exc}") from exc
        try:
            gates = tuple(
                Gate(entry["type"], tuple(int(m) for m in entry["modes"]))
                for entry in payload["gates"]
            )
            return Circuit(int(payload["mode_count"]), gates)
        except (KeyError, TypeError) as exc:
            raise CircuitError(f"invalid circuit JSON structure: {exc}") from exc


def apply_fourier(tensor: np.ndarray, axis: int, n: int, inverse: bool) -> np.ndarray:
    """Centered Fourier gate along one axis via FFT.

    The centered kernel factorizes as U = i^N * D * T * D with D = diag((-1)^j)
    and T the unitary DFT with positive exponent, so the gate is an FFT plus
    center-offset phase corrections and is exactly unitary.
    """
    j = np.arange(n)
    d = np.where(j % 2, -1.0, 1.0)
    shape = [1] * tensor.ndim
    shape[axis] = n
    d = d.reshape(shape)
    phase = (1j) ** (n % 4)
    if not inverse:
        return phase * d * (np.sqrt(n) * np.fft.ifft(d * tensor, axis=axis))
    return np.conj(phase) * d * (np.fft.fft(d * tensor, axis=axis) / np.sqrt(n))


_SUM_PERM_CACHE: dict[tuple[int, bool], np.ndarray] = {}
_SUM_FULL_CACHE: dict[tuple, np.ndarray] = {}
_SUM_FULL_CACHE_LIMIT = 8_000_000  # total cached permutation entries


def _sum_flat_permutation(n: int, inverse: bool) -> np.ndarray:
    key = (n, inverse)
    perm = _SUM_PERM_CACHE.get(key)
    if perm is None:
        c0 = n // 2
        jc = np.arange(n)[:, None]
        jt = np.arange(n)[None, :]
        idx = (jt + jc - c0) % n if inverse else (jt - jc + c0) % n
        perm = (jc * n + idx).reshape(-1)
        _SUM_PERM_CACHE[key] = perm
    return perm


def _sum_full_permutation(shape: tuple[int, ...], control: int, target: int,
                          inverse: bool) -> np.ndarray | None:
    """Whole-tensor gather indices for a Sum gate; cached for small tensors."""
    size = 1
    for s in shape:
        size *= s
    if size > _SUM_FULL_CACHE_LIMIT // 4:
        return None
    key = (shape, control, target, inverse)
    perm = _SUM_FULL_CACHE.get(key)
    if perm is None:
        if sum(p.size for p in _SUM_FULL_CACHE.values()) + size > _SUM_FULL_CACHE_LIMIT:
            _SUM_FULL_CACHE.clear()
        grids = np.indices(shape, sparse=True)
        n = shape[target]
        c0 = n // 2
        jc, jt = grids[control], grids[target]
        src_t = (jt + jc - c0) % n if inverse else (jt - jc + c0) % n
        strides = np.ones(len(shape), dtype=np.int64)
        for ax in range(len(shape) - 2, -1, -1):
            strides[ax] = strides[ax + 1] * shape[ax + 1]
        flat = np.zeros(shape, dtype=np.int64)
        for ax in range(len(shape)):
            flat = flat + (src_t if ax == target else grids[ax]) * strides[ax]
        perm = flat.reshape(-1)
        _SUM_FULL_CACHE[key] = perm
    return perm


def _apply_sum(tensor: np.ndarray, control: int, target: int, n: int, inverse: bool) -> np.ndarray:
    perm = _sum_full_permutation(tensor.shape, control, target, inverse)
    if perm is not None:
        return tensor.reshape(-1)[perm].reshape(tensor.shape)
    arr = np.moveaxis(tensor, (control, target), (-2, -1))
    lead = arr.shape[:-2]
    flat = np.ascontiguousarray(arr).reshape(*lead, n * n)
    out = flat[..., _sum_flat_permutation(n, inverse)].reshape(*lead, n, n)
    return np.moveaxis(out, (-2, -1), (control, target))


def apply_gate(state: MultiModeState, gate: Gate) -> MultiModeState:
    if max(gate.modes) >= state.grid.mode_count:
        raise CircuitError(f"gate {gate} exceeds state mode count")
    n = state.grid.n_points
    if gate.kind == "F":
        out = apply_fourier(state.tensor, gate.modes[0], n, inverse=False)
    elif gate.kind == "Finv":
        out = apply_fourier(state.tensor, gate.modes[0], n, inverse=True)
    elif gate.kind == "Sum":
        out = _apply_sum(state.tensor, gate.modes[0], gate.modes[1], n, inverse=False)
    else:
        out = _apply_sum(state.tensor, gate.modes[0], gate.modes[1], n, inverse=True)
    return MultiModeState(state.grid, np.ascontiguousarray(out))


def apply_circuit(state: MultiModeState, circuit: Circuit | Iterable[Gate]) -> MultiModeState:
    if isinstance(circuit, Circuit):
        if circuit.mode_count != state.grid.mode_count:
            raise GridError(
                f"circuit has {circuit.mode_count} modes, state has {state.grid.mode_count}"
            )
        gates: Iterable[Gate] = circuit.gates
    else:
        gates = circuit
    for g in gates:
        state = apply_gate(state, g)
    return state
