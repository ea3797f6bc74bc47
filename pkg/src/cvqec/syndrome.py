"""Syndrome circuits, finite-precision measurement, correction, QEC cycles.

Syndrome extraction follows the textbook picture: one fresh zero-position
ancilla per measured form, Sum/SumInv gates accumulating the signed position
sum into the ancilla (momentum terms are picked up by conjugating the involved
data mode with Fourier gates around the accumulation), then a position readout
of each ancilla.  :func:`build_syndrome_circuit` constructs that explicit
circuit; :func:`extract_syndrome` uses the mathematically identical projective
route on the data modes only, which avoids materializing N**(M+K) amplitudes.
The two routes agree exactly and the test suite checks them against each other
at small N.

Measurement imprecision enters purely classically: the collapse happens at
full grid precision and the recorded value is the true value plus noise drawn
from the measurement model, averaged over the model's repetition count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codes import CodeSpec, encode
from .gates import Circuit, Gate, apply_circuit, fourier, fourier_inv, sum_gate, sum_inv
from .grid import (
    GridError,
    GridSpec,
    MultiModeState,
    apply_displacement,
    apply_kernel_convolution,
    fidelity,
    gaussian_kernel,
    measure_form,
    reduced_density,
)
from .symplectic import DecodeError, DisplacementError
from .symplectic import decode_syndrome as _decode


class SyndromeCircuitError(ValueError):
    """A nullifier cannot be mapped onto the ancilla-accumulation gadget."""


# ---------------------------------------------------------------------------
# Measurement models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementModel:
    """Classical noise on syndrome records.

    kind "exact": reported equals true.  kind "gaussian": additive normal noise
    of standard deviation sigma (position units).  kind "custom": offsets drawn
    from a finite table.  With repetitions > 1 the collapsed syndrome is re-read
    with fresh noise and the mean is reported.
    """

    kind: str
    sigma: float = 0.0
    offsets: tuple[float, ...] = ()
    probabilities: tuple[float, ...] | None = None
    repetitions: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "gaussian", "custom"):
            raise ValueError(f"unknown measurement model kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.kind == "custom":
            if not self.offsets:
                raise ValueError("custom model needs a non-empty offset table")
            if self.probabilities is not None and len(self.probabilities) != len(self.offsets):
                raise ValueError("probabilities must match offsets")

    @staticmethod
    def exact() -> "MeasurementModel":
        return MeasurementModel("exact")

    @staticmethod
    def gaussian(sigma: float, repetitions: int = 1) -> "MeasurementModel":
        return MeasurementModel("gaussian", sigma=sigma, repetitions=repetitions)

    @staticmethod
    def custom(
        offsets: Sequence[float],
        probabilities: Sequence[float] | None = None,
        repetitions: int = 1,
    ) -> "MeasurementModel":
        return MeasurementModel(
            "custom",
            offsets=tuple(float(o) for o in offsets),
            probabilities=None if probabilities is None else tuple(probabilities),
            repetitions=repetitions,
        )

    def sample_noise(self, rng: np.random.Generator) -> float:
        """One reported-minus-true offset, already averaged over repetitions."""
        if self.kind == "exact":
            return 0.0
        draws = np.empty(self.repetitions)
        for i in range(self.repetitions):
            if self.kind == "gaussian":
                draws[i] = rng.normal(0.0, self.sigma) if self.sigma > 0 else 0.0
            else:
                draws[i] = float(rng.choice(self.offsets, p=self.probabilities))
        return float(draws.mean())


# ---------------------------------------------------------------------------
# Syndrome plan and circuit construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyndromePlan:
    """Explicit readout circuit plus the linear forms each ancilla reports."""

    code_name: str
    circuit: Circuit
    readout_modes: tuple[int, ...]
    forms: np.ndarray  # K x 2M, rows ordered like readout_modes

    @property
    def data_modes(self) -> int:
        return self.forms.shape[1] // 2


def _pairwise_difference_forms(m_modes: int) -> list[np.ndarray]:
    """Redundant cyclic position differences (x_j - x_{j+1}); three readouts
    for the repetition code even though only two are independent."""
    rows = []
    for j in range(m_modes):
        k = (j + 1) % m_modes
        row = np.zeros(2 * m_modes)
        row[j] = 1.0
        row[k] = -1.0
        rows.append(row)
    return rows


def measured_forms(code: CodeSpec) -> list[np.ndarray]:
    if code.name == "repetition3":
        return _pairwise_difference_forms(code.mode_count)
    return [n.as_array() for n in code.nullifiers]


def build_syndrome_circuit(code: CodeSpec) -> SyndromePlan:
    """Append one fresh zero-position ancilla per measured form and accumulate
    the form's value into it.

    Position coefficient +1/-1 on mode j becomes Sum/SumInv(j, ancilla).
    A momentum coefficient wraps the accumulation in an inverse-Fourier /
    Fourier pair on the data mode, so the ancilla picks up the momentum value
    and the data mode is restored.  Coefficients outside {-1, 0, +1} after
    scaling are rejected (none of the built-in codes produce them).
    """
    m = code.mode_count
    forms = measured_forms(code)
    gates: list[Gate] = []
    readout = []
    for i, row in enumerate(forms):
        anc = m + i
        readout.append(anc)
        scaled = _scale_to_unit(row)
        for mode in range(m):
            a = scaled[mode]
            if a == 0:
                continue
            gates.append(sum_gate(mode, anc) if a > 0 else sum_inv(mode, anc))
        for mode in range(m):
            b = scaled[m + mode]
            if b == 0:
                continue
            gates.append(fourier_inv(mode))
            gates.append(sum_gate(mode, anc) if b > 0 else sum_inv(mode, anc))
            gates.append(fourier(mode))
    circuit = Circuit(m + len(forms), tuple(gates))
    return SyndromePlan(code.name, circuit, tuple(readout), np.array(forms))


def _scale_to_unit(row: np.ndarray) -> np.ndarray:
    nz = np.abs(row[np.abs(row) > 1e-12])
    scale = nz.min()
    scaled = row / scale
    if np.any(np.abs(scaled - np.round(scaled)) > 1e-9) or np.any(
        np.abs(np.round(scaled)) > 1
    ):
        raise SyndromeCircuitError(
            "form coefficients not expressible as +-1 integers after scaling"
        )
    return np.round(scaled).astype(int)


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


@dataclass
class SyndromeRecord:
    """True (collapsed) and reported syndrome values, position units."""

    true_values: np.ndarray
    reported_values: np.ndarray
    nullifier_ids: tuple[int, ...]
    forms: np.ndarray

    def __post_init__(self) -> None:
        if len(self.true_values) != len(self.reported_values):
            raise ValueError("true/reported length mismatch")

    def to_json(self) -> str:
        return json.dumps(
            {
                "true_values": [float(v) for v in self.true_values],
                "reported_values": [float(v) for v in self.reported_values],
                "nullifier_ids": list(self.nullifier_ids),
            },
            indent=2,
        )


_JOINT_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _joint_position_plan(grid, forms: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Mixed-radix group array and outcome-to-values table for a set of
    position-only forms, measurable in one joint projection; None when any
    form carries momentum.

    Only an integer-independent subset of the rows enters the joint radix;
    rows that are integer combinations of earlier ones (the redundant third
    pairwise difference is one) have their wrapped values reconstructed from
    the sampled outcome, which is exact on the cyclic grid.
    """
    m = forms.shape[1] // 2
    if np.any(np.abs(forms[:, m:]) > 1e-12):
        return None
    key = (grid.n_points, grid.mode_count, forms.tobytes())
    hit = _JOINT_CACHE.get(key)
    if hit is not None:
        return hit
    from .grid import _form_plan

    n = grid.n_points
    c0 = grid.center_index
    basis: list[np.ndarray] = []
    combos: list[tuple[int, np.ndarray | None]] = []  # (basis index or -1, combo)
    for row in forms:
        if basis:
            a = np.array(basis).T
            sol, *_ = np.linalg.lstsq(a, row, rcond=None)
            if (
                np.linalg.norm(a @ sol - row) < 1e-9
                and np.all(np.abs(sol - np.round(sol)) < 1e-9)
            ):
                combos.append((-1, np.round(sol)))
                continue
        basis.append(row)
        combos.append((len(basis) - 1, None))
    joint = np.zeros((n,) * grid.mode_count, dtype=np.int64)
    radix = 1
    radices = []
    for row in basis:
        _, grp = _form_plan(grid, row)
        joint = joint + grp * radix
        radices.append(radix)
        radix *= n
    outcomes = np.arange(radix)
    basis_vals = np.empty((len(basis), radix))
    for i, r in enumerate(radices):
        basis_vals[i] = ((outcomes // r) % n - c0) * grid.dx
    values = np.empty((len(forms), radix))
    for i, (bi, combo) in enumerate(combos):
        if bi >= 0:
            values[i] = basis_vals[bi]
        else:
            raw = combo @ basis_vals[: len(combo)]
            values[i] = (np.mod(raw / grid.dx + c0, n) - c0) * grid.dx
    plan = (joint, values)
    _JOINT_CACHE[key] = plan
    return plan


def extract_syndrome(
    state: MultiModeState,
    code: CodeSpec,
    model: MeasurementModel,
    rng: np.random.Generator,
    plan: SyndromePlan | None = None,
) -> tuple[SyndromeRecord, MultiModeState]:
    """Born-sample every syndrome form (collapsing the state), then apply the
    measurement model's classical noise to produce the reported values.

    Uses the projective route on the data modes, exactly equivalent to running
    the explicit ancilla circuit from :func:`build_syndrome_circuit` and
    reading the ancillae out (values wrap mod N like a cyclic ancilla does).
    Position-only form sets are sampled jointly in one projection, which has
    the same joint law as measuring them one at a time (they commute).
    """
    if plan is None:
        plan = build_syndrome_circuit(code)
    joint = _joint_position_plan(state.grid, plan.forms)
    if joint is not None:
        grp, values = joint
        t = state.tensor
        prob = np.bincount(
            grp.reshape(-1), weights=(t.real**2 + t.imag**2).reshape(-1),
            minlength=values.shape[1],
        )
        cum = np.cumsum(prob)
        outcome = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        collapsed = t * (grp == outcome)
        collapsed /= np.sqrt(np.sum(collapsed.real**2 + collapsed.imag**2))
        true_vals = values[:, outcome].copy()
        state = MultiModeState(state.grid, collapsed)
    else:
        true_vals = np.empty(len(plan.forms))
        for i, row in enumerate(plan.forms):
            true_vals[i], state = measure_form(state, row, rng)
    reported = np.array([v + model.sample_noise(rng) for v in true_vals])
    record = SyndromeRecord(true_vals, reported, tuple(range(len(plan.forms))), plan.forms)
    return record, state


def extract_syndrome_via_ancillas(
    state: MultiModeState,
    code: CodeSpec,
    model: MeasurementModel,
    rng: np.random.Generator,
) -> tuple[SyndromeRecord, MultiModeState]:
    """Reference implementation running the explicit ancilla circuit.

    Memory scales as N**(M+K); intended for small-N cross-validation of
    :func:`extract_syndrome`.
    """
    from .grid import make_product_state, measure_position

    plan = build_syndrome_circuit(code)
    n = state.grid.n_points
    total = plan.circuit.mode_count
    big_grid = GridSpec(n, total)
    anc = make_product_state(
        GridSpec(n, total - code.mode_count), [big_grid.center_index] * (total - code.mode_count)
    )
    joint = np.multiply.outer(state.tensor, anc.tensor).reshape((n,) * total)
    big = MultiModeState(big_grid, joint)
    big = apply_circuit(big, plan.circuit)
    true_vals = np.empty(len(plan.readout_modes))
    for i, mode in enumerate(plan.readout_modes):
        idx, big = measure_position(big, mode, rng)
        true_vals[i] = big.grid.value_of(idx)
    # project the data modes back out (ancillae are position eigenstates now)
    sl = [slice(None)] * total
    for i, mode in enumerate(plan.readout_modes):
        sl[mode] = big.grid.index_of(true_vals[i])
    data = big.tensor[tuple(sl)]
    data = data / np.linalg.norm(data)
    reported = np.array([v + model.sample_noise(rng) for v in true_vals])
    record = SyndromeRecord(true_vals, reported, tuple(range(len(plan.forms))), plan.forms)
    return record, MultiModeState(state.grid, np.ascontiguousarray(data))


# ---------------------------------------------------------------------------
# Correction
# ---------------------------------------------------------------------------


@dataclass
class CorrectionResult:
    state: MultiModeState
    inferred: DisplacementError | None
    applied: bool
    reason: str = ""


def correct(
    state: MultiModeState,
    code: CodeSpec,
    record: SyndromeRecord,
    decode_modes: Sequence[int] | None = None,
    strict: bool = False,
) -> CorrectionResult:
    """Decode the reported syndrome and apply the inverse displacement.

    The inferred position shift is rounded to the nearest grid point and the
    momentum kick to the nearest conjugate-grid point, keeping the corrective
    displacement exactly unitary on the periodic grid.  Decode failures leave
    the state untouched and are flagged in the result.  ``strict=True`` keeps
    the exact-readout acceptance threshold; the default accepts the
    best-fitting mode, which is the correct behavior for noisy records.
    """
    tol = None if strict else float("inf")
    try:
        err = _decode(
            code, record.reported_values, forms=record.forms, modes=decode_modes,
            residual_tol=tol,
        )
    except DecodeError as exc:
        return CorrectionResult(state, None, False, reason=str(exc))
    dx = state.grid.dx
    shift = int(round(err.e_x / dx))
    kick_steps = int(round(err.e_p / dx))
    if shift == 0 and kick_steps == 0:
        return CorrectionResult(state, err, False, reason="zero correction")
    fixed = apply_displacement(state, err.mode, -shift, -kick_steps * dx)
    return CorrectionResult(fixed, err, True)


# ---------------------------------------------------------------------------
# Error channels and full cycles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorSpec:
    """Declarative error to inject: nothing, a displacement, or a convolution
    with a Gaussian (or explicitly sampled) kernel."""

    kind: str  # "none" | "displacement" | "convolution"
    mode: int = 0
    shift_points: int = 0
    momentum_kick: float = 0.0
    kernel_width: float = 0.0
    kernel: tuple[complex, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "displacement", "convolution"):
            raise ValueError(f"unknown error kind {self.kind!r}")

    @staticmethod
    def none() -> "ErrorSpec":
        return ErrorSpec("none")

    @staticmethod
    def displacement(mode: int, shift_points: int, momentum_kick: float = 0.0) -> "ErrorSpec":
        return ErrorSpec(
            "displacement", mode=mode, shift_points=shift_points, momentum_kick=momentum_kick
        )

    @staticmethod
    def convolution(mode: int, kernel_width: float) -> "ErrorSpec":
        return ErrorSpec("convolution", mode=mode, kernel_width=kernel_width)


def apply_error(state: MultiModeState, error: ErrorSpec) -> MultiModeState:
    if error.kind == "none":
        return state
    if error.kind == "displacement":
        return apply_displacement(state, error.mode, error.shift_points, error.momentum_kick)
    if error.kernel is not None:
        kernel = np.asarray(error.kernel, dtype=np.complex128)
    else:
        kernel = gaussian_kernel(state.grid, error.kernel_width)
    out, _ = apply_kernel_convolution(state, error.mode, kernel)
    return out


@dataclass
class QecCycleReport:
    pre_error_fidelity: float
    post_correction_fidelity: float
    logical_fidelity: float
    inferred_error: DisplacementError | None
    syndrome: SyndromeRecord
    correction_applied: bool

    def __post_init__(self) -> None:
        for f in (self.pre_error_fidelity, self.post_correction_fidelity):
            if not -1e-9 <= f <= 1 + 1e-9:
                raise ValueError(f"fidelity {f} out of range")

    def to_json(self) -> str:
        inferred = None
        if self.inferred_error is not None:
            e = self.inferred_error
            inferred = {"mode": e.mode, "e_x": e.e_x, "e_p": e.e_p}
        return json.dumps(
            {
                "pre_error_fidelity": self.pre_error_fidelity,
                "post_correction_fidelity": self.post_correction_fidelity,
                "logical_fidelity": self.logical_fidelity,
                "inferred_error": inferred,
                "correction_applied": self.correction_applied,
                "syndrome": json.loads(self.syndrome.to_json()),
            },
            indent=2,
        )


def decoded_logical_density(state: MultiModeState, code: CodeSpec) -> np.ndarray:
    """Unencode and trace out the ancillae; the logical mode's density matrix."""
    decoded = apply_circuit(state, code.encoder.inverse())
    return reduced_density(decoded, [code.logical_mode])


def run_qec_cycle(
    logical_wavefunction: np.ndarray,
    code: CodeSpec,
    error: ErrorSpec,
    model: MeasurementModel,
    rng: np.random.Generator,
    grid: GridSpec | None = None,
    n_points: int | None = None,
    decode_modes: Sequence[int] | None = None,
    plan: SyndromePlan | None = None,
    reference: MultiModeState | None = None,
) -> QecCycleReport:
    """encode -> inject error -> extract syndrome -> correct -> compare."""
    if grid is None:
        if n_points is None:
            raise GridError("pass either grid or n_points")
        grid = GridSpec(n_points, code.mode_count)
    if reference is None:
        reference = encode(logical_wavefunction, code, grid)
    damaged = apply_error(reference, error)
    pre_fid = fidelity(damaged, reference)
    record, collapsed = extract_syndrome(damaged, code, model, rng, plan=plan)
    result = correct(collapsed, code, record, decode_modes=decode_modes)
    post_fid = fidelity(result.state, reference)
    rho = decoded_logical_density(result.state, code)
    psi = np.asarray(logical_wavefunction, dtype=np.complex128)
    logical_fid = float(np.real(psi.conj() @ rho @ psi))
    return QecCycleReport(
        pre_error_fidelity=pre_fid,
        post_correction_fidelity=post_fid,
        logical_fidelity=logical_fid,
        inferred_error=result.inferred,
        syndrome=record,
        correction_applied=result.applied,
    )


# ---------------------------------------------------------------------------
# Analytic post-correction state under noisy records
# ---------------------------------------------------------------------------


def estimator_gain(code: CodeSpec, error_mode: int, plan: SyndromePlan | None = None) -> float:
    """Std-dev factor mapping per-readout noise to the position estimate for a
    known error mode: the norm of the e_x row of the pseudo-inverse of that
    mode's form columns."""
    if plan is None:
        plan = build_syndrome_circuit(code)
    m = code.mode_count
    block = plan.forms[:, [error_mode, m + error_mode]]
    pinv = np.linalg.pinv(block)
    return float(np.linalg.norm(pinv[0, :]))


def residual_shift_distribution(
    code: CodeSpec,
    model: MeasurementModel,
    grid: GridSpec,
    error_mode: int = 0,
) -> np.ndarray:
    """Distribution of the grid-rounded net shift left on the corrected mode
    after a noisy-record correction targeted at a known error mode.

    Entry k is the probability of residual shift (k - N/2) grid points.  The
    estimate's noise is the per-readout noise scaled by the decoder's gain and
    averaged over repetitions; rounding to the grid and folding onto the
    periodic axis happen exactly as the correction step does them.
    """
    n = grid.n_points
    c0 = grid.center_index
    out = np.zeros(n)
    if model.kind == "exact":
        out[c0] = 1.0
        return out
    gain = estimator_gain(code, error_mode)
    if model.kind == "gaussian":
        sigma_eff = model.sigma * gain / math.sqrt(model.repetitions)
        if sigma_eff == 0:
            out[c0] = 1.0
            return out
        edges_scale = grid.dx / (sigma_eff * math.sqrt(2.0))
        for k in range(-c0, n - c0):
            p = 0.0
            for wrap in (-2, -1, 0, 1, 2):  # fold tails of the periodic axis
                kk = k + wrap * n
                p += 0.5 * (
                    math.erf((kk + 0.5) * edges_scale) - math.erf((kk - 0.5) * edges_scale)
                )
            out[(k + c0) % n] = p
        return out / out.sum()
    # custom table: enumerate offset tuples over the readouts feeding the estimate
    if model.repetitions != 1:
        raise ValueError("custom-model prediction supports repetitions == 1 only")
    plan = build_syndrome_circuit(code)
    m = code.mode_count
    block = plan.forms[:, [error_mode, m + error_mode]]
    g = np.linalg.pinv(block)[0, :]
    probs = (
        np.asarray(model.probabilities)
        if model.probabilities is not None
        else np.full(len(model.offsets), 1.0 / len(model.offsets))
    )
    import itertools as _it

    if len(model.offsets) ** len(g) > 200_000:
        raise ValueError("custom offset table too large to enumerate")
    for combo in _it.product(range(len(model.offsets)), repeat=len(g)):
        p = float(np.prod(probs[list(combo)]))
        shift = float(np.dot(g, [model.offsets[i] for i in combo]))
        k = int(round(shift / grid.dx))
        out[(k + c0) % n] += p
    return out / out.sum()


def decoherence_prediction(
    logical_wavefunction: np.ndarray,
    model: MeasurementModel,
    code: CodeSpec | None = None,
    grid: GridSpec | None = None,
    error_mode: int = 0,
) -> np.ndarray:
    """Analytic logical density matrix after a noise-limited correction.

    The corrected state is a mixture of grid-shifted copies of the input,
    rho(u, u') = sum_z p(z) psi(u + z) conj(psi(u' + z)), with p the residual
    shift distribution induced by the measurement noise through the decoder.
    A delta-like model returns the pure input projector; noise wide compared to
    the wavefunction's coherence length suppresses the off-diagonal terms.
    """
    from .codes import build_repetition3

    if code is None:
        code = build_repetition3()
    psi = np.asarray(logical_wavefunction, dtype=np.complex128)
    if grid is None:
        grid = GridSpec(len(psi), 1)
    p = residual_shift_distribution(code, model, grid, error_mode)
    c0 = grid.center_index
    rho = np.zeros((grid.n_points, grid.n_points), dtype=np.complex128)
    for k in range(grid.n_points):
        if p[k] == 0:
            continue
        # entry k holds P(rounded estimate error = k points); the correction
        # subtracts the estimate, so the state ends shifted by -k points
        shifted = np.roll(psi, -(k - c0))
        rho += p[k] * np.outer(shifted, shifted.conj())
    return rho


def trace_distance(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """0.5 * trace norm of the difference of two Hermitian matrices."""
    eig = np.linalg.eigvalsh(rho_a - rho_b)
    return float(0.5 * np.sum(np.abs(eig)))
