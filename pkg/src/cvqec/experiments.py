"""Config-driven Monte-Carlo sweeps over measurement-noise widths.

Trials are independent; each draws its random stream from (seed, sigma index,
trial index), so dispatching them across worker threads (CVQEC_THREADS) cannot
change any result and sweep CSVs are byte-identical across runs and thread
counts for a fixed config.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .codes import encode, get_code
from .grid import GridSpec
from .syndrome import (
    ErrorSpec,
    MeasurementModel,
    build_syndrome_circuit,
    decoherence_prediction,
    run_qec_cycle,
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class SweepConfig:
    code: str
    grid_n: int
    sigmas: list[float]
    trials: int
    seed: int
    repetitions: int = 1
    logical: dict = field(default_factory=lambda: {"kind": "eigenstate", "index": None})
    error: dict = field(default_factory=lambda: {"kind": "displacement", "mode": 0, "shift": 2})
    decode_modes: list[int] | None = None
    sigma_unit_dx: bool = True

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if any(s < 0 for s in self.sigmas):
            raise ConfigError("sigma must be >= 0")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")

    @staticmethod
    def from_json(text: str) -> "SweepConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from exc
        try:
            return SweepConfig(
                code=payload["code"],
                grid_n=int(payload["grid_n"]),
                sigmas=[float(s) for s in payload["sigmas"]],
                trials=int(payload["trials"]),
                seed=int(payload["seed"]),
                repetitions=int(payload.get("repetitions", 1)),
                logical=payload.get("logical", {"kind": "eigenstate", "index": None}),
                error=payload.get("error", {"kind": "displacement", "mode": 0, "shift": 2}),
                decode_modes=payload.get("decode_modes"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc}") from exc


def logical_wavefunction(spec: dict, grid: GridSpec) -> np.ndarray:
    """Build the logical input from its config description."""
    kind = spec.get("kind", "eigenstate")
    n = grid.n_points
    if kind == "eigenstate":
        index = spec.get("index")
        idx = grid.center_index if index is None else int(index)
        if not 0 <= idx < n:
            raise ConfigError(f"logical index {idx} out of range")
        psi = np.zeros(n, dtype=np.complex128)
        psi[idx] = 1.0
        return psi
    if kind == "two_peak":
        sep = int(spec.get("separation", n // 4))
        c0 = grid.center_index
        psi = np.zeros(n, dtype=np.complex128)
        psi[(c0 - sep // 2) % n] = 1.0
        psi[(c0 + (sep + 1) // 2) % n] = 1.0
        return psi / np.linalg.norm(psi)
    if kind == "custom":
        amps = np.asarray(
            [complex(re, im) for re, im in spec["amplitudes"]], dtype=np.complex128
        )
        if amps.shape != (n,):
            raise ConfigError("custom amplitudes length mismatch")
        return amps / np.linalg.norm(amps)
    raise ConfigError(f"unknown logical kind {kind!r}")


def error_from_config(spec: dict, dx: float = 1.0) -> ErrorSpec:
    """Shift is in grid points; kick and kernel width are in units of dx."""
    kind = spec.get("kind", "none")
    if kind == "none":
        return ErrorSpec.none()
    if kind == "displacement":
        return ErrorSpec.displacement(
            int(spec.get("mode", 0)), int(spec.get("shift", 0)),
            float(spec.get("kick", 0.0)) * dx,
        )
    if kind == "convolution":
        return ErrorSpec.convolution(int(spec.get("mode", 0)), float(spec["kernel_width"]) * dx)
    raise ConfigError(f"unknown error kind {kind!r}")


def trial_rng(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Cheap counter-based per-trial stream; depends only on (seed, stream,
    trial), never on scheduling, so threading cannot change results."""
    key = ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | ((stream & 0xFFFFFFFF) << 32) | (trial & 0xFFFFFFFF)
    return np.random.Generator(np.random.Philox(counter=0, key=key))


def thread_count() -> int:
    raw = os.environ.get("CVQEC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CVQEC_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass
class SweepRow:
    sigma: float
    repetitions: int
    trials: int
    mean_fidelity: float
    std_fidelity: float
    mean_logical_fidelity: float
    std_logical_fidelity: float
    analytic_logical_fidelity: float | None


def run_sweep(
    config: SweepConfig, trial_rows: list[tuple] | None = None
) -> list[SweepRow]:
    """Aggregate rows per sigma; when ``trial_rows`` is a list, also append one
    (sigma, repetitions, trial, fidelity, logical_fidelity) tuple per trial."""
    code = get_code(config.code)
    grid = GridSpec(config.grid_n, code.mode_count)
    logical_grid = GridSpec(config.grid_n, 1)
    psi = logical_wavefunction(config.logical, logical_grid)
    error = error_from_config(config.error, grid.dx)
    reference = encode(psi, code, grid)
    plan = build_syndrome_circuit(code)
    rows = []
    workers = thread_count()
    for si, sigma_dx in enumerate(sorted(config.sigmas)):
        sigma = sigma_dx * grid.dx if config.sigma_unit_dx else sigma_dx
        model = (
            MeasurementModel.exact()
            if sigma == 0
            else MeasurementModel.gaussian(sigma, repetitions=config.repetitions)
        )

        def one_trial(trial: int, _model=model) -> tuple[float, float]:
            rng = trial_rng(config.seed, si, trial)
            report = run_qec_cycle(
                psi,
                code,
                error,
                _model,
                rng,
                grid=grid,
                decode_modes=config.decode_modes,
                plan=plan,
                reference=reference,
            )
            return report.post_correction_fidelity, report.logical_fidelity

        if workers == 1:
            results = [one_trial(t) for t in range(config.trials)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one_trial, range(config.trials)))
        if trial_rows is not None:
            for t, (full_fid, logical_fid) in enumerate(results):
                trial_rows.append((sigma, config.repetitions, t, full_fid, logical_fid))
        full = np.array([r[0] for r in results])
        logical = np.array([r[1] for r in results])
        analytic: float | None = None
        if code.name == "repetition3":
            error_mode = error.mode if error.kind != "none" else 0
            rho = decoherence_prediction(psi, model, code, logical_grid, error_mode)
            analytic = float(np.real(psi.conj() @ rho @ psi))
        rows.append(
            SweepRow(
                sigma=sigma,
                repetitions=config.repetitions,
                trials=config.trials,
                mean_fidelity=float(full.mean()),
                std_fidelity=float(full.std(ddof=0)),
                mean_logical_fidelity=float(logical.mean()),
                std_logical_fidelity=float(logical.std(ddof=0)),
                analytic_logical_fidelity=analytic,
            )
        )
    return rows


SWEEP_HEADER = (
    "sigma,repetitions,trials,mean_fidelity,std_fidelity,"
    "mean_logical_fidelity,std_logical_fidelity,analytic_logical_fidelity"
)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def sweep_rows_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        analytic = "" if r.analytic_logical_fidelity is None else _fmt(r.analytic_logical_fidelity)
        lines.append(
            ",".join(
                [
                    _fmt(r.sigma),
                    str(r.repetitions),
                    str(r.trials),
                    _fmt(r.mean_fidelity),
                    _fmt(r.std_fidelity),
                    _fmt(r.mean_logical_fidelity),
                    _fmt(r.std_logical_fidelity),
                    analytic,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(sweep_rows_to_csv(rows))
    return path


TRIALS_HEADER = "code,error_kind,error_mode,sigma,repetitions,trial,fidelity,logical_fidelity"


def trial_rows_to_csv(config: SweepConfig, trial_rows: Sequence[tuple]) -> str:
    """Per-trial stream: one row per (sigma, trial)."""
    error = error_from_config(config.error)
    lines = [TRIALS_HEADER]
    for sigma, reps, trial, full, logical in trial_rows:
        lines.append(
            ",".join(
                [
                    config.code,
                    error.kind,
                    str(error.mode),
                    _fmt(sigma),
                    str(reps),
                    str(trial),
                    _fmt(full),
                    _fmt(logical),
                ]
            )
        )
    return "\n".join(lines) + "\n"
