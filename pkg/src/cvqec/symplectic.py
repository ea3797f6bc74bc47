"""Exact symplectic (Heisenberg) engine for the gate set.

Quadratures are ordered R = (x_0 .. x_{M-1}, p_0 .. p_{M-1}) project-wide.  The
matrix S attached to a circuit C is the displacement-covariance map

    C . D(d) = D(S d) . C        (equivalently  C^dag R C = S R),

so "displace then apply C" equals "apply C then displace by S d".  With the
grid engine's Fourier convention (F takes the position eigenstate at a to the
momentum eigenstate at a) the single-mode Fourier block is [[0, -1], [1, 0]]:
x -> p and p -> -x.  Sum(c, t) maps x_t -> x_t + x_c and p_c -> p_c - p_t.

Nullifiers of a code are the encoder images of the ancillas' position forms:
linear quadrature combinations with value exactly zero on every encoded state
(zero modulo the periodic grid length once discretized).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .gates import Circuit, Gate

if TYPE_CHECKING:  # pragma: no cover
    from .codes import CodeSpec

SV_RTOL = 1e-9  # relative singular-value tolerance for rank decisions


class DecodeError(ValueError):
    """Syndrome decoding failed."""


class UnrecognizedSyndromeError(DecodeError):
    """No single-mode displacement reproduces the syndrome."""


class AmbiguousSyndromeError(DecodeError):
    """Two inequivalent single-mode displacements reproduce the syndrome."""


@dataclass(frozen=True)
class SymplecticRep:
    """2M x 2M real symplectic matrix acting on quadrature displacement vectors."""

    m_modes: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = self.m_modes
        if self.matrix.shape != (2 * m, 2 * m):
            raise ValueError(f"matrix shape {self.matrix.shape} != {(2 * m, 2 * m)}")

    def symplectic_defect(self) -> float:
        """max |S^T Omega S - Omega|; zero for a true symplectic matrix."""
        om = omega_matrix(self.m_modes)
        return float(np.max(np.abs(self.matrix.T @ om @ self.matrix - om)))


@dataclass(frozen=True)
class Nullifier:
    """Linear quadrature form f . R annihilating the codespace."""

    coeffs: tuple[float, ...]
    nominal_value: float = 0.0

    def __post_init__(self) -> None:
        if not any(abs(c) > 1e-12 for c in self.coeffs):
            raise ValueError("nullifier has all-zero coefficients")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


@dataclass(frozen=True)
class DisplacementError:
    """Position shift e_x and momentum kick e_p on a single mode (grid units of x)."""

    mode: int
    e_x: float
    e_p: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.e_x) and np.isfinite(self.e_p)):
            raise ValueError("displacement components must be finite")

    def embed(self, m_modes: int) -> np.ndarray:
        d = np.zeros(2 * m_modes)
        d[self.mode] = self.e_x
        d[m_modes + self.mode] = self.e_p
        return d


def omega_matrix(m_modes: int) -> np.ndarray:
    """Standard block form [[0, I], [-I, 0]] on (x..., p...) ordering."""
    om = np.zeros((2 * m_modes, 2 * m_modes))
    om[:m_modes, m_modes:] = np.eye(m_modes)
    om[m_modes:, :m_modes] = -np.eye(m_modes)
    return om


def gate_symplectic(gate: Gate, m_modes: int) -> SymplecticRep:
    s = np.eye(2 * m_modes)
    if gate.kind in ("F", "Finv"):
        (m,) = gate.modes
        s[m, m] = 0.0
        s[m_modes + m, m_modes + m] = 0.0
        sign = 1.0 if gate.kind == "F" else -1.0
        s[m, m_modes + m] = -sign
        s[m_modes + m, m] = sign
    else:
        c, t = gate.modes
        sign = 1.0 if gate.kind == "Sum" else -1.0
        s[t, c] = sign
        s[m_modes + c, m_modes + t] = -sign
    return SymplecticRep(m_modes, s)


def circuit_symplectic(circuit: Circuit) -> SymplecticRep:
    s = np.eye(2 * circuit.mode_count)
    for g in circuit.gates:
        s = gate_symplectic(g, circuit.mode_count).matrix @ s
    return SymplecticRep(circuit.mode_count, s)


def encoder_images(circuit: Circuit) -> np.ndarray:
    """Rows of S^-1: row r expresses the encoder image U R_r U^dag of the input
    quadrature R_r as a form over the output quadratures."""
    s = circuit_symplectic(circuit).matrix
    return np.linalg.inv(s)


def derive_nullifiers(code: "CodeSpec") -> list[Nullifier]:
    """Encoder images of each ancilla's position form x_a.

    These raw forms may mix x and p on the same mode; see
    :func:`measurement_basis` for the equivalent basis used by syndrome
    circuits.
    """
    if sorted(code.ancilla_modes) != [
        m for m in range(code.mode_count) if m != code.logical_mode
    ]:
        raise ValueError("ancilla set inconsistent with circuit mode count")
    rows = encoder_images(code.encoder)
    return [Nullifier(tuple(rows[a, :])) for a in code.ancilla_modes]


def measurement_basis(nullifiers: Sequence[Nullifier], m_modes: int) -> list[Nullifier]:
    """Equivalent nullifier basis in which, per row, every mode carries x or p
    but never both, with all coefficients in {-1, 0, +1}.

    Such rows are diagonalizable by per-mode Fourier rotations and can be
    accumulated into a single ancilla with Sum gates, which is what the
    syndrome circuits need.  The search is a deterministic scan over small
    integer combinations of the raw rows; rows are ranked position-only first,
    then by L1 weight.  Raises if no spanning friendly basis exists.
    """
    raw = np.array([n.as_array() for n in nullifiers])
    k = raw.shape[0]
    candidates = []
    for combo in itertools.product(range(-2, 3), repeat=k):
        if all(c == 0 for c in combo):
            continue
        row = np.asarray(combo, dtype=float) @ raw
        row = np.where(np.abs(row) < 1e-9, 0.0, row)
        if not _row_friendly(row, m_modes):
            continue
        first = np.argmax(np.abs(row) > 1e-9)
        if row[first] < 0:
            row = -row
        candidates.append(np.round(row))
    uniq: list[np.ndarray] = []
    for row in candidates:
        if not any(np.array_equal(row, u) for u in uniq):
            uniq.append(row)
    uniq.sort(
        key=lambda r: (
            bool(np.any(np.abs(r[m_modes:]) > 0)),
            float(np.sum(np.abs(r))),
            tuple(r),
        )
    )
    picked: list[np.ndarray] = []
    for row in uniq:
        trial = picked + [row]
        if np.linalg.matrix_rank(np.array(trial), tol=1e-9) == len(trial):
            picked.append(row)
        if len(picked) == k:
            break
    if len(picked) != k:
        raise ValueError("no measurement-friendly nullifier basis found")
    return [Nullifier(tuple(r)) for r in picked]


def _row_friendly(row: np.ndarray, m_modes: int) -> bool:
    for m in range(m_modes):
        if abs(row[m]) > 1e-9 and abs(row[m_modes + m]) > 1e-9:
            return False
    nz = row[np.abs(row) > 1e-9]
    return bool(np.all(np.abs(np.abs(nz) - 1.0) < 1e-9))


def syndrome_matrix(nullifiers: Sequence[Nullifier]) -> np.ndarray:
    """Rows are nullifier coefficient vectors; the syndrome of a displacement d
    equals this matrix times d's 2M embedding."""
    return np.array([n.as_array() for n in nullifiers])


ERROR_CLASSES = ("full", "position", "momentum")


@dataclass
class CorrectabilityReport:
    """Outcome of the displacement-error distinguishability checks."""

    mode_count: int
    error_class: str
    mode_injective: list[bool]
    pair_min_singular: dict[tuple[int, int], float]
    pair_ok: dict[tuple[int, int], bool]
    failures: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(self.mode_injective) and all(self.pair_ok.values())

    def failing_pairs(self) -> list[tuple[int, int]]:
        return [p for p, ok in self.pair_ok.items() if not ok]

    def to_json(self) -> str:
        payload = {
            "mode_count": self.mode_count,
            "error_class": self.error_class,
            "all_pass": self.all_pass,
            "mode_injective": self.mode_injective,
            "pair_min_singular": {f"{j},{k}": v for (j, k), v in self.pair_min_singular.items()},
            "pair_ok": {f"{j},{k}": v for (j, k), v in self.pair_ok.items()},
            "failures": self.failures,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def check_correctability(code: "CodeSpec", error_class: str = "full") -> CorrectabilityReport:
    """Test syndrome distinguishability of single-mode displacement errors.

    Per mode: the syndrome map restricted to that mode's displacement space
    must be injective.  Per mode pair: the two image spaces must intersect only
    at zero (full singular-value rank of the stacked column block).  The error
    class restricts displacements to position shifts, momentum kicks, or both.
    """
    if error_class not in ERROR_CLASSES:
        raise ValueError(f"error_class must be one of {ERROR_CLASSES}")
    syn = code.syndrome_matrix()
    m_modes = code.mode_count
    cols_of = {
        "full": lambda m: [m, m_modes + m],
        "position": lambda m: [m],
        "momentum": lambda m: [m_modes + m],
    }[error_class]
    report = CorrectabilityReport(m_modes, error_class, [], {}, {})
    for m in range(m_modes):
        ok = _full_column_rank(syn[:, cols_of(m)])
        report.mode_injective.append(ok)
        if not ok:
            report.failures.append(f"mode {m}: {error_class} displacements not injective")
    for j in range(m_modes):
        for k in range(j + 1, m_modes):
            block = syn[:, cols_of(j) + cols_of(k)]
            sv = np.linalg.svd(block, compute_uv=False)
            want = block.shape[1]
            min_sv = float(sv[want - 1]) if len(sv) >= want else 0.0
            ok = min_sv > SV_RTOL * max(float(sv[0]), 1e-300)
            report.pair_min_singular[(j, k)] = min_sv
            report.pair_ok[(j, k)] = ok
            if not ok:
                report.failures.append(f"pair ({j},{k}): images intersect beyond zero")
    return report


def _full_column_rank(block: np.ndarray) -> bool:
    sv = np.linalg.svd(block, compute_uv=False)
    want = block.shape[1]
    if len(sv) < want:
        return False
    return bool(sv[want - 1] > SV_RTOL * max(float(sv[0]), 1e-300))


def decode_syndrome(
    code: "CodeSpec",
    syndrome: np.ndarray,
    forms: np.ndarray | None = None,
    modes: Sequence[int] | None = None,
    residual_tol: float | None = None,
) -> DisplacementError:
    """Infer the single-mode displacement whose syndrome matches the readings.

    ``forms`` defaults to the code's nullifier matrix; pass the measured-form
    matrix when the readout layout differs (the redundant pairwise-difference
    layout does).  ``modes`` restricts the candidate error locations.
    ``residual_tol`` is the acceptance threshold relative to |syndrome|
    (default 1e-6, the exact-readout regime); pass ``float("inf")`` to always
    accept the best-fitting mode, which is the right mode of use under noisy
    measurement models.

    A zero syndrome decodes to the zero displacement on mode 0 by convention.
    Ties between candidate modes are accepted when the competing corrections
    are equivalent (their difference has zero syndrome and zero action on the
    logical quadratures), in which case the lowest mode index wins; otherwise
    they raise :class:`AmbiguousSyndromeError`.
    """
    syndrome = np.asarray(syndrome, dtype=float)
    if forms is None:
        forms = code.syndrome_matrix()
    if forms.shape != (len(syndrome), 2 * code.mode_count):
        raise ValueError("forms shape does not match syndrome length / mode count")
    if modes is None:
        modes = range(code.mode_count)
    if residual_tol is None:
        residual_tol = 1e-6
    scale = float(np.linalg.norm(syndrome))
    if scale < 1e-12:
        return DisplacementError(0, 0.0, 0.0)
    m_modes = code.mode_count
    matches: list[tuple[float, DisplacementError]] = []
    for m in modes:
        block = forms[:, [m, m_modes + m]]
        sol, *_ = np.linalg.lstsq(block, syndrome, rcond=None)
        residual = float(np.linalg.norm(block @ sol - syndrome))
        matches.append((residual, DisplacementError(int(m), float(sol[0]), float(sol[1]))))
    matches.sort(key=lambda t: (t[0], t[1].mode))
    best_res, best = matches[0]
    if best_res > residual_tol * scale:
        raise UnrecognizedSyndromeError(
            f"no single-mode displacement matches (best residual {best_res:.3e})"
        )
    logical = code.logical_forms()
    syn = code.syndrome_matrix()
    tie_window = 1e-9 * max(scale, 1.0)
    for res, cand in matches[1:]:
        if res > best_res + tie_window or cand.mode == best.mode:
            continue
        delta = cand.embed(m_modes) - best.embed(m_modes)
        harmless = (
            np.linalg.norm(syn @ delta) < 1e-9 and np.linalg.norm(logical @ delta) < 1e-9
        )
        if not harmless:
            raise AmbiguousSyndromeError(
                f"modes {best.mode} and {cand.mode} both match the syndrome"
            )
    return best
