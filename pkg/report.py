"""
Publicación de resultados en disco.

Este módulo escribe los productos de cada subcomando:
    - Perfil de potencia (CSV, dBm): columna z_km y una columna por canal
    - Reporte de la corrida (JSON)
    - Traza por iteración (CSV)
    - Grilla del barrido (CSV con "Div"/"Osc")
    - Registro de comparación (CSV) y resumen legible (Markdown)
    - Matrices de la comparación en grilla y su resumen
    - Estudio CH × CL (CSV)

Todos los CSV usan punto decimal y orden de columnas fijo, sin depender
del locale.
"""
from __future__ import annotations

import csv
import json
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from raman.common import from_dbm, now_iso, to_dbm
from raman.state import SolverReport, Status, TraceRecord

logger = logging.getLogger(__name__)


DIVERGED_CELL = "Div"
OSCILLATING_CELL = "Osc"
INVALID_MARK = "invalid"
FLOAT_FORMAT = "%.15g"


# =============================================================================
# PERFIL
# =============================================================================

def channel_column(frequency_thz: float) -> str:
    """Nombre de columna de un canal, ej: '186.125THz'."""
    return f"{frequency_thz:.6g}THz"


def write_profile_csv(path: Path, z_km: np.ndarray, frequencies: np.ndarray, profile_w: np.ndarray) -> Path:
    """
    Escribe el perfil en dBm: una fila por punto de la grilla.

    Args:
        path: Archivo de salida.
        z_km: Puntos de la grilla.
        frequencies: Frecuencia de cada fila del perfil (THz).
        profile_w: Perfil N_ch × N_g en watts.

    Returns:
        Path: El archivo escrito.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(["z_km"] + [channel_column(f) for f in frequencies])
    with np.errstate(divide="ignore", invalid="ignore"):
        data = np.column_stack([z_km, to_dbm(profile_w).T])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt=FLOAT_FORMAT)
    logger.info(f"Perfil guardado en: {path}")
    return path


def read_profile_csv(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Lee un perfil escrito por write_profile_csv.

    Returns:
        tuple: (z_km, frecuencias THz, perfil N_ch × N_g en watts).
    """
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    if not header or header[0] != "z_km":
        raise ValueError(f"{path}: encabezado inesperado")
    frequencies = np.array([float(col.removesuffix("THz")) for col in header[1:]])
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], frequencies, from_dbm(data[:, 1:].T)


# =============================================================================
# REPORTE Y TRAZA
# =============================================================================

def _float_or_none(value: float) -> float | None:
    return float(value) if np.isfinite(value) else None


def report_to_dict(report: SolverReport, label: str = "") -> dict:
    """Representación serializable de un SolverReport (sin la traza)."""
    return {
        "updated_at": now_iso(),
        "scenario": label,
        "status": report.status.value,
        "iterations": report.iterations,
        "pump_factor_used": report.pump_factor_used,
        "divergence_flag": report.divergence_flag,
        "final_pump_error_w": [_float_or_none(e) for e in np.asarray(report.final_pump_error, dtype=float)],
        "cl_history": [{"iteration": it, "cl": cl} for it, cl in report.cl_history],
        "wall_time_s": report.wall_time,
        "message": report.message,
    }


def write_report(path: Path, report: SolverReport, label: str = "") -> Path:
    """Guarda el reporte de una corrida en JSON."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(report_to_dict(report, label), ensure_ascii=False, indent=2),
        encoding="utf-8"
    )
    logger.info(f"Reporte guardado en: {path}")
    return path


def write_trace_csv(path: Path, trace: Sequence[TraceRecord], n_pumps: int) -> Path:
    """Guarda la traza: iteración, etapa y error de cada bomba (W)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["iteration", "stage"] + [f"pump_error_{i + 1}_w" for i in range(n_pumps)])
        for rec in trace:
            writer.writerow([rec.iteration, rec.stage.value] + [repr(e) for e in rec.pump_error])
    logger.info(f"Traza guardada en: {path}")
    return path


# =============================================================================
# BARRIDO
# =============================================================================

def sweep_cell(status: Status, iterations: int) -> str:
    """
    Celda de la grilla de barrido.

    Examples:
        >>> sweep_cell(Status.CONVERGED, 99)
        '99'
        >>> sweep_cell(Status.ITERATION_CAPPED, 3000)
        'Osc'
    """
    if status == Status.CONVERGED:
        return str(iterations)
    if status == Status.DIVERGED:
        return DIVERGED_CELL
    return OSCILLATING_CELL


def write_sweep_csv(
    path: Path,
    row_keys: Sequence[tuple[float, float | None]],
    adjustments: Sequence[float],
    cells: Sequence[Sequence[str]],
) -> Path:
    """
    Escribe la grilla del barrido.

    Args:
        path: Archivo de salida.
        row_keys: (potencia dBm, k o None) por fila.
        adjustments: Ajustes (columnas).
        cells: Texto de cada celda, fila por fila.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with_tilt = any(k is not None for _, k in row_keys)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        head = ["signal_dbm"] + (["tilt_k"] if with_tilt else [])
        writer.writerow(head + [f"adj={a:g}" for a in adjustments])
        for (power, k), row in zip(row_keys, cells):
            key = [f"{power:g}"] + ([f"{k:g}"] if with_tilt else [])
            writer.writerow(key + list(row))
    logger.info(f"Barrido guardado en: {path}")
    return path


# =============================================================================
# COMPARACIÓN
# =============================================================================

COMPARISON_FIELDS = [
    "scenario",
    "hybrid_status",
    "hybrid_iterations",
    "hybrid_seconds",
    "oracle_converged",
    "oracle_seconds",
    "max_db_error",
    "time_gain",
]


def fmt(value, decimals: int = 4) -> str:
    """Formatea un valor para tablas; '--' si falta."""
    if value is None:
        return "--"
    if isinstance(value, float):
        return f"{value:.{decimals}f}"
    return str(value)


def write_comparison_csv(path: Path, rows: Sequence[dict]) -> Path:
    """Guarda uno o más registros de comparación."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=COMPARISON_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row[k] for k in COMPARISON_FIELDS})
    logger.info(f"Comparación guardada en: {path}")
    return path


def write_comparison_summary(
    path: Path,
    row: dict,
    repetitions: int,
    oracle_residuals: Sequence[float] = (),
    oracle_message: str = "",
) -> Path:
    """Resumen legible de una comparación híbrido vs. oráculo."""
    lines = [
        f"# Comparación: {row['scenario']}",
        "",
        f"Generado: {now_iso()}  (repeticiones: {repetitions})",
        "",
        "| Método | Estado | Iteraciones | Tiempo medio (s) |",
        "| --- | --- | --- | --- |",
        f"| Híbrido | {row['hybrid_status']} | {row['hybrid_iterations']} | {fmt(row['hybrid_seconds'])} |",
        f"| Disparo | {'Converged' if row['oracle_converged'] else 'Failed'} "
        f"| {len(oracle_residuals)} | {fmt(row['oracle_seconds'])} |",
        "",
        f"- **Error máximo (dB)**: {fmt(row['max_db_error'])}",
        f"- **Ganancia de tiempo**: {fmt(row['time_gain'], 2)}",
    ]
    if oracle_message:
        lines.append(f"- **Oráculo**: {oracle_message}")
    if oracle_residuals:
        lines += ["", "Residuo del disparo por iteración (W):", ""]
        lines += [f"{i + 1}. {r:.3e}" for i, r in enumerate(oracle_residuals)]

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Resumen guardado en: {path}")
    return path


def write_grid_summary(
    path: Path,
    label: str,
    cells: int,
    valid: int,
    mean_gain: float | None,
    repetitions: int,
) -> Path:
    """Resumen de una comparación en grilla: celdas válidas y ganancia media."""
    lines = [
        f"# Comparación en grilla: {label}",
        "",
        f"Generado: {now_iso()}  (repeticiones por celda: {repetitions})",
        "",
        f"- **Celdas**: {cells}",
        f"- **Celdas válidas**: {valid}",
        f"- **Ganancia de tiempo media**: {fmt(mean_gain, 2)}",
        "",
        f"Matrices: `{label}_grid_hybrid_times.csv`, `{label}_grid_oracle_times.csv`, "
        f"`{label}_grid_errors.csv`, `{label}_grid_gains.csv`.",
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Resumen de grilla guardado en: {path}")
    return path


# =============================================================================
# ESTUDIO CH × CL
# =============================================================================

CORRECTION_STUDY_FIELDS = ["ch", "cl", "cells", "converged", "mean_iterations"]


def write_correction_study_csv(path: Path, rows: Sequence[dict]) -> Path:
    """Guarda una fila por par (CH, CL); mean_iterations vacío si ninguna celda convergió."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CORRECTION_STUDY_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row[k] for k in CORRECTION_STUDY_FIELDS})
    logger.info(f"Estudio CH×CL guardado en: {path}")
    return path
