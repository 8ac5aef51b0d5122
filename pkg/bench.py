"""
Trabajos del CLI: resolución única, barrido de estrés, estudio de los
factores de corrección y comparación con el oráculo (en un escenario o
en una grilla).

Cada función recibe rutas y parámetros ya resueltos, escribe sus archivos
en out_dir y devuelve el código de salida del proceso:
    0  Converged (o grilla escrita)
    1  error de entrada (archivo, argumentos o alguna celda inválida)
    2  Diverged
    3  Oscillating / IterationCapped
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import report
from raman.common import ComparisonError, ScenarioError
from raman.link import LinkScenario, build_grid
from raman.oracle import ShootingResult, max_db_error, solve_bvp_shooting
from raman.scenario_file import ScenarioTemplate, load_template
from raman.solver import run_with_pump_factor_escalation
from raman.state import SolverParams, Status

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_DIVERGED = 2
EXIT_NOT_CONVERGED = 3

EXIT_CODES = {
    Status.CONVERGED: EXIT_OK,
    Status.DIVERGED: EXIT_DIVERGED,
    Status.OSCILLATING: EXIT_NOT_CONVERGED,
    Status.ITERATION_CAPPED: EXIT_NOT_CONVERGED,
}


# =============================================================================
# TIPOS DE DATOS
# =============================================================================

@dataclass(frozen=True)
class ScenarioOverrides:
    """Valores del CLI que reemplazan los del archivo de escenario."""
    signal_dbm: float | None = None
    adjustment: float | None = None
    step_km: float | None = None

    def apply(self, template: ScenarioTemplate, tilt_k: float | None = None) -> LinkScenario:
        """Arma el escenario del archivo con los overrides aplicados."""
        return template.build(
            signal_dbm=self.signal_dbm,
            adjustment=self.adjustment,
            step_km=self.step_km,
            tilt_k=tilt_k,
        )


@dataclass(frozen=True)
class SweepSpec:
    """
    Grilla de un barrido de estrés.

    Attributes:
        signal_powers_dbm: Potencias de señal (filas).
        adjustments: Factores de ajuste de bombas (columnas).
        tilt_ks: Escalas de inclinación; vacío para no variarla.
        repetitions: Corridas por celda para promediar el tiempo.
    """
    signal_powers_dbm: tuple[float, ...]
    adjustments: tuple[float, ...]
    tilt_ks: tuple[float, ...] = ()
    repetitions: int = 1

    def __post_init__(self) -> None:
        if not self.signal_powers_dbm:
            raise ScenarioError("se requiere al menos una potencia", field="signal_powers_dbm")
        if not self.adjustments:
            raise ScenarioError("se requiere al menos un ajuste", field="adjustments")
        if any(a <= 0 for a in self.adjustments):
            raise ScenarioError("los ajustes deben ser positivos", field="adjustments")
        if self.repetitions < 1:
            raise ScenarioError("debe ser ≥ 1", field="repetitions")

    def row_keys(self) -> list[tuple[float, float | None]]:
        """(potencia, k) de cada fila, en orden de salida."""
        ks = self.tilt_ks or (None,)
        return [(p, k) for p in self.signal_powers_dbm for k in ks]


@dataclass
class ComparisonRecord:
    """
    Resultado de comparar el método híbrido con el oráculo.

    time_gain solo existe si ambos métodos convergieron; max_db_error es
    None cuando la comparación no es válida.
    """
    scenario: str
    hybrid_status: Status
    hybrid_iterations: int
    hybrid_seconds: float
    oracle_converged: bool
    oracle_seconds: float
    max_db_error: float | None = None
    time_gain: float | None = None

    def as_row(self) -> dict:
        return {
            "scenario": self.scenario,
            "hybrid_status": self.hybrid_status.value,
            "hybrid_iterations": self.hybrid_iterations,
            "hybrid_seconds": self.hybrid_seconds,
            "oracle_converged": self.oracle_converged,
            "oracle_seconds": self.oracle_seconds,
            "max_db_error": report.INVALID_MARK if self.max_db_error is None else self.max_db_error,
            "time_gain": self.time_gain,
        }


# =============================================================================
# SOLVE
# =============================================================================

def cli_solve(
    scenario_file: Path,
    params: SolverParams,
    out_dir: Path,
    overrides: ScenarioOverrides = ScenarioOverrides(),
    write_trace: bool = False,
) -> int:
    """
    Resuelve un escenario y guarda perfil, reporte y (opcional) traza.

    Returns:
        int: Código de salida según el estado de la corrida.
    """
    try:
        scenario = overrides.apply(load_template(scenario_file))
    except ScenarioError as e:
        logger.error(f"Escenario inválido: {e}")
        return EXIT_INPUT_ERROR

    profile, rep = run_with_pump_factor_escalation(scenario, params)

    stem = Path(scenario_file).stem
    grid = build_grid(scenario.length, scenario.step)
    report.write_profile_csv(out_dir / f"{stem}_profile.csv", grid.points, scenario.frequencies, profile)
    report.write_report(out_dir / f"{stem}_report.json", rep, scenario.label)
    if write_trace:
        report.write_trace_csv(out_dir / f"{stem}_trace.csv", rep.trace, scenario.n_pumps)

    return EXIT_CODES[rep.status]


# =============================================================================
# GRILLAS
# =============================================================================

@dataclass(frozen=True)
class CellResult:
    """Resultado de una celda del barrido."""
    status: Status
    iterations: int
    seconds: float

    @property
    def text(self) -> str:
        return report.sweep_cell(self.status, self.iterations)


def build_grid_scenarios(
    template: ScenarioTemplate,
    sweep: SweepSpec,
    step_km: float | None = None,
) -> list[LinkScenario]:
    """
    Arma el escenario de cada celda, fila por fila.

    Raises:
        ScenarioError: Si alguna celda no es válida; el barrido no se ejecuta.
    """
    scenarios = []
    for power, k in sweep.row_keys():
        for adj in sweep.adjustments:
            try:
                scenarios.append(template.build(signal_dbm=power, adjustment=adj, tilt_k=k, step_km=step_km))
            except ScenarioError as e:
                raise ScenarioError(f"celda ({power:g} dBm, ajuste {adj:g}): {e}") from e
    return scenarios


def _run_cells(fn, jobs: list[tuple], workers: int) -> list:
    """Ejecuta fn sobre cada job conservando el orden de la grilla."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, *zip(*jobs)))
    return [fn(*job) for job in jobs]


def _by_rows(values: list, n_cols: int) -> list[list]:
    return [values[i:i + n_cols] for i in range(0, len(values), n_cols)]


# =============================================================================
# SWEEP
# =============================================================================

def _solve_cell(scenario: LinkScenario, params: SolverParams, repetitions: int) -> CellResult:
    """Resuelve una celda del barrido; corre en un proceso aparte si hay workers."""
    elapsed = []
    for _ in range(repetitions):
        _, rep = run_with_pump_factor_escalation(scenario, params)
        elapsed.append(rep.wall_time)
    return CellResult(rep.status, rep.iterations, float(np.mean(elapsed)))


def cli_sweep(
    scenario_file: Path,
    sweep: SweepSpec,
    params: SolverParams,
    out_dir: Path,
    step_km: float | None = None,
    workers: int = 1,
) -> int:
    """
    Barre potencias de señal × ajustes (× inclinaciones) y guarda la grilla.

    Las celdas son independientes y pueden resolverse en paralelo; la
    salida siempre respeta el orden de la grilla.

    Returns:
        int: 0 si la grilla se escribió, 1 ante errores de entrada
            (incluida cualquier celda inválida).
    """
    try:
        scenarios = build_grid_scenarios(load_template(scenario_file), sweep, step_km)
    except ScenarioError as e:
        logger.error(f"Escenario inválido: {e}")
        return EXIT_INPUT_ERROR

    logger.info(f"Barrido de {len(scenarios)} celdas con {workers} worker(s)")
    results = _run_cells(_solve_cell, [(s, params, sweep.repetitions) for s in scenarios], workers)

    n_cols = len(sweep.adjustments)
    stem = Path(scenario_file).stem
    report.write_sweep_csv(
        out_dir / f"{stem}_sweep.csv", sweep.row_keys(), sweep.adjustments,
        _by_rows([r.text for r in results], n_cols),
    )
    report.write_sweep_csv(
        out_dir / f"{stem}_sweep_times.csv", sweep.row_keys(), sweep.adjustments,
        _by_rows([report.fmt(r.seconds) for r in results], n_cols),
    )
    return EXIT_OK


# =============================================================================
# ESTUDIO CH × CL
# =============================================================================

@dataclass(frozen=True)
class CorrectionStudyRow:
    """Resumen de la grilla de estrés para un par (CH, CL)."""
    ch: float
    cl: float
    cells: int
    converged: int
    mean_iterations: float | None

    def as_row(self) -> dict:
        return {
            "ch": self.ch,
            "cl": self.cl,
            "cells": self.cells,
            "converged": self.converged,
            "mean_iterations": self.mean_iterations,
        }


def summarize_correction_pair(ch: float, cl: float, results: list[CellResult]) -> CorrectionStudyRow:
    """
    Cuenta las celdas convergidas y promedia sus iteraciones.

    Examples:
        >>> cells = [CellResult(Status.CONVERGED, 10, 0.1), CellResult(Status.CONVERGED, 30, 0.1),
        ...          CellResult(Status.DIVERGED, 2, 0.1)]
        >>> summarize_correction_pair(3.0, 0.1, cells).mean_iterations
        20.0
    """
    done = [r.iterations for r in results if r.status == Status.CONVERGED]
    mean = float(np.mean(done)) if done else None
    return CorrectionStudyRow(ch, cl, len(results), len(done), mean)


def cli_correction_study(
    scenario_file: Path,
    sweep: SweepSpec,
    chs: tuple[float, ...],
    cls: tuple[float, ...],
    params: SolverParams,
    out_dir: Path,
    step_km: float | None = None,
    workers: int = 1,
) -> int:
    """
    Repite la grilla de estrés para cada par (CH, CL).

    Por cada par informa las celdas convergidas y la media de iteraciones
    de esas celdas.

    Returns:
        int: 0 si el estudio se escribió, 1 ante errores de entrada.
    """
    try:
        scenarios = build_grid_scenarios(load_template(scenario_file), sweep, step_km)
        pairs = [(ch, cl, params.with_overrides(ch=ch, cl_initial=cl)) for ch in chs for cl in cls]
    except ScenarioError as e:
        logger.error(f"Estudio inválido: {e}")
        return EXIT_INPUT_ERROR
    if not pairs:
        logger.error("Se requiere al menos un valor de CH y uno de CL")
        return EXIT_INPUT_ERROR

    logger.info(f"Estudio CH×CL: {len(pairs)} pares × {len(scenarios)} celdas")
    jobs = [(s, p, sweep.repetitions) for _, _, p in pairs for s in scenarios]
    results = _run_cells(_solve_cell, jobs, workers)

    rows = []
    for (ch, cl, _), cells in zip(pairs, _by_rows(results, len(scenarios))):
        row = summarize_correction_pair(ch, cl, cells)
        logger.info(f"CH={ch:g} CL={cl:g}: {row.converged}/{row.cells} convergidas, "
                    f"media {report.fmt(row.mean_iterations, 1)} iteraciones")
        rows.append(row.as_row())

    stem = Path(scenario_file).stem
    report.write_correction_study_csv(out_dir / f"{stem}_ch_cl.csv", rows)
    return EXIT_OK


# =============================================================================
# COMPARE
# =============================================================================

def compare_scenario(
    scenario: LinkScenario,
    params: SolverParams,
    repetitions: int = 1,
) -> tuple[ComparisonRecord, ShootingResult]:
    """
    Corre el método híbrido y el oráculo `repetitions` veces cada uno.

    Los tiempos promedian solo el cálculo, sin E/S. Si el oráculo falla,
    el error queda marcado como inválido y no hay ganancia de tiempo.
    """
    grid = build_grid(scenario.length, scenario.step)
    hybrid_times, oracle_times = [], []
    for i in range(repetitions):
        t0 = time.perf_counter()
        profile, rep = run_with_pump_factor_escalation(scenario, params)
        hybrid_times.append(time.perf_counter() - t0)

        t0 = time.perf_counter()
        shot = solve_bvp_shooting(scenario, grid, tol=params.tol)
        oracle_times.append(time.perf_counter() - t0)
        logger.info(f"[{scenario.label}] Repetición {i + 1}/{repetitions}: híbrido {hybrid_times[-1]:.3f}s, "
                    f"disparo {oracle_times[-1]:.3f}s")

    record = ComparisonRecord(
        scenario=scenario.label,
        hybrid_status=rep.status,
        hybrid_iterations=rep.iterations,
        hybrid_seconds=float(np.mean(hybrid_times)),
        oracle_converged=shot.converged,
        oracle_seconds=float(np.mean(oracle_times)),
    )
    if shot.converged:
        try:
            record.max_db_error = max_db_error(profile, shot.profile)
        except ComparisonError as e:
            logger.warning(f"[{scenario.label}] Comparación inválida: {e}")
    if shot.converged and rep.converged and record.hybrid_seconds > 0:
        record.time_gain = record.oracle_seconds / record.hybrid_seconds
    return record, shot


def cli_compare(
    scenario_file: Path,
    params: SolverParams,
    out_dir: Path,
    repetitions: int = 1,
    overrides: ScenarioOverrides = ScenarioOverrides(),
) -> int:
    """
    Compara el método híbrido con el oráculo de disparo en un escenario.

    Returns:
        int: Código de salida según el estado del método híbrido.
    """
    if repetitions < 1:
        logger.error("repetitions debe ser ≥ 1")
        return EXIT_INPUT_ERROR
    try:
        scenario = overrides.apply(load_template(scenario_file))
    except ScenarioError as e:
        logger.error(f"Escenario inválido: {e}")
        return EXIT_INPUT_ERROR

    record, shot = compare_scenario(scenario, params, repetitions)

    stem = Path(scenario_file).stem
    row = record.as_row()
    report.write_comparison_csv(out_dir / f"{stem}_comparison.csv", [row])
    report.write_comparison_summary(
        out_dir / f"{stem}_comparison.md", row, repetitions, shot.residuals, shot.message
    )
    return EXIT_CODES[record.hybrid_status]


def _compare_cell(scenario: LinkScenario, params: SolverParams, repetitions: int) -> ComparisonRecord:
    record, _ = compare_scenario(scenario, params, repetitions)
    return record


def mean_time_gain(records: list[ComparisonRecord]) -> float | None:
    """
    Media de la ganancia de tiempo sobre las celdas válidas.

    Examples:
        >>> a = ComparisonRecord("a", Status.CONVERGED, 9, 0.1, True, 1.0, 0.01, 10.0)
        >>> b = ComparisonRecord("b", Status.CONVERGED, 9, 0.1, False, 1.0)
        >>> mean_time_gain([a, b])
        10.0
    """
    gains = [r.time_gain for r in records if r.time_gain is not None]
    return float(np.mean(gains)) if gains else None


def cli_compare_grid(
    scenario_file: Path,
    sweep: SweepSpec,
    params: SolverParams,
    out_dir: Path,
    step_km: float | None = None,
    workers: int = 1,
) -> int:
    """
    Compara híbrido y oráculo en cada celda de una grilla potencia (o k) × ajuste.

    Escribe cuatro matrices con la forma de la grilla: tiempo medio del
    híbrido, tiempo medio del oráculo, error máximo en dB ("invalid" si
    la comparación no vale) y ganancia de tiempo, más un resumen con la
    ganancia media.

    Returns:
        int: 0 si las matrices se escribieron, 1 ante errores de entrada.
    """
    try:
        scenarios = build_grid_scenarios(load_template(scenario_file), sweep, step_km)
    except ScenarioError as e:
        logger.error(f"Escenario inválido: {e}")
        return EXIT_INPUT_ERROR

    logger.info(f"Comparación en grilla de {len(scenarios)} celdas con {workers} worker(s)")
    records = _run_cells(_compare_cell, [(s, params, sweep.repetitions) for s in scenarios], workers)

    n_cols = len(sweep.adjustments)
    keys, adjs = sweep.row_keys(), sweep.adjustments
    matrices = {
        "hybrid_times": [report.fmt(r.hybrid_seconds) for r in records],
        "oracle_times": [report.fmt(r.oracle_seconds) for r in records],
        "errors": [report.INVALID_MARK if r.max_db_error is None else report.fmt(r.max_db_error, 6) for r in records],
        "gains": [report.INVALID_MARK if r.time_gain is None else report.fmt(r.time_gain, 2) for r in records],
    }
    stem = Path(scenario_file).stem
    for name, cells in matrices.items():
        report.write_sweep_csv(out_dir / f"{stem}_grid_{name}.csv", keys, adjs, _by_rows(cells, n_cols))

    gain = mean_time_gain(records)
    report.write_grid_summary(
        out_dir / f"{stem}_grid_summary.md",
        label=stem,
        cells=len(records),
        valid=sum(r.time_gain is not None for r in records),
        mean_gain=gain,
        repetitions=sweep.repetitions,
    )
    logger.info(f"Ganancia de tiempo media: {report.fmt(gain, 2)}")
    return EXIT_OK
