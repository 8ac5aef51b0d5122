"""
Control adaptativo del factor de corrección CL.

Durante la calibración dinámica de bombas se observa la traza del error
de la primera bomba. Si aparecen más de Peaks_thresh picos significativos
desde el último ajuste, CL se reduce en proporción a la cantidad de picos.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from scipy.signal import argrelmax

from .state import SolverParams, SolverState

logger = logging.getLogger(__name__)


def find_peaks(series: Sequence[float] | np.ndarray) -> list[tuple[int, float]]:
    """
    Encuentra los máximos locales estrictos de una serie.

    Los extremos nunca son picos y las mesetas no producen picos.

    Args:
        series: Valores de la serie.

    Returns:
        list: Pares (índice, valor) con índices crecientes.

    Examples:
        >>> find_peaks([1, 3, 1, 4, 1])
        [(1, 3.0), (3, 4.0)]
        >>> find_peaks([1, 2, 2, 1])
        []
    """
    x = np.asarray(series, dtype=float)
    if x.size < 3:
        return []
    idx = argrelmax(x, order=1)[0]
    return [(int(i), float(x[i])) for i in idx]


def significant_peaks(window: np.ndarray, params: SolverParams) -> list[tuple[int, float]]:
    """Picos cuyo valor supera magnitude_thresh × max(|ventana|)."""
    if window.size == 0:
        return []
    threshold = params.magnitude_thresh * float(np.max(np.abs(window)))
    return [(i, v) for i, v in find_peaks(window) if v > threshold]


def is_oscillating(window: np.ndarray, params: SolverParams) -> bool:
    """True si la ventana tiene más de peaks_thresh picos significativos."""
    return len(significant_peaks(window, params)) > params.peaks_thresh


def maybe_reduce_cl(state: SolverState, params: SolverParams) -> tuple[float, int]:
    """
    Revisa la ventana de error y reduce CL si detecta oscilación.

    Con n picos significativos (n > peaks_thresh): CL ← CL / (c0 · n) y
    last_change pasa a la iteración actual. El estado se actualiza en el
    lugar y la reducción queda registrada en cl_history.

    Args:
        state: Estado de la corrida (en etapa DPC).
        params: Parámetros del solver.

    Returns:
        tuple: (CL vigente, last_change vigente).
    """
    window = state.first_pump_error_window()
    peaks = significant_peaks(window, params)

    if len(peaks) > params.peaks_thresh:
        new_cl = state.cl_current / (params.c0 * len(peaks))
        logger.info(
            f"Oscilación detectada en iteración {state.iteration}: "
            f"{len(peaks)} picos, CL {state.cl_current:.4g} → {new_cl:.4g}"
        )
        state.cl_current = new_cl
        state.last_change = state.iteration
        state.cl_history.append((state.iteration, new_cl))
        state.oscillation_detected = True

    return state.cl_current, state.last_change
