"""
Núcleo de propagación en forma integral.

La ecuación Raman en forma integral se evalúa para todos los canales y
todos los puntos de la grilla en una sola expresión matricial:

    P' = P(:,0) · exp(-d·α·Z + d·(G × P × T)·ΔZ)

donde T es el operador trapezoidal acumulado. La matriz de perfil tiene
canales en las filas y puntos de la grilla en las columnas.
"""
from __future__ import annotations

import numpy as np

from .common import ScenarioError
from .link import Grid


def trapezoid_operator(grid: Grid) -> np.ndarray:
    """
    Construye el operador trapezoidal acumulado T ((N_z+1) × (N_z+1)).

    Para una fila de potencias p, (p @ T)[k] · ΔZ es la integral
    trapezoidal de 0 a Z_k. Los pesos se expresan relativos a ΔZ, de modo
    que un último intervalo más corto queda absorbido en T.

    Args:
        grid: Grilla espacial.

    Returns:
        np.ndarray: Operador triangular superior con columna 0 nula.

    Example:
        >>> trapezoid_operator(build_grid(2, 1))
        array([[0. , 0.5, 0.5],
               [0. , 0.5, 1. ],
               [0. , 0. , 0.5]])
    """
    widths = np.diff(grid.points) / grid.step
    n_points = grid.points.size
    n_intervals = widths.size

    # Aporte de cada intervalo m a sus dos extremos
    contrib = np.zeros((n_points, n_intervals))
    idx = np.arange(n_intervals)
    contrib[idx, idx] += widths / 2.0
    contrib[idx + 1, idx] += widths / 2.0

    T = np.zeros((n_points, n_points))
    T[:, 1:] = np.cumsum(contrib, axis=1)
    return T


def propagate(
    P: np.ndarray,
    G: np.ndarray,
    alpha: np.ndarray,
    direction: np.ndarray,
    grid: Grid,
    T: np.ndarray,
) -> np.ndarray:
    """
    Propaga el perfil en un solo paso con la ecuación vectorial.

    Cada fila queda anclada a su propio valor en z=0. La entrada no se
    modifica. Un desborde a Inf/NaN no es un error aquí: la detección de
    divergencia corresponde al llamador.

    Args:
        P: Perfil actual (N_ch × N_g), W.
        G: Matriz de acople (N_ch × N_ch), 1/(W·km).
        alpha: Atenuación por canal (1/km).
        direction: +1 (Forward) o -1 (Backward) por canal.
        grid: Grilla espacial.
        T: Operador trapezoidal de la misma grilla.

    Returns:
        np.ndarray: Nuevo perfil P'.

    Raises:
        ScenarioError: Si las dimensiones no concuerdan.
    """
    n_ch, n_g = P.shape
    if G.shape != (n_ch, n_ch) or T.shape != (n_g, n_g) or grid.points.size != n_g:
        raise ScenarioError(
            f"dimensiones incompatibles: P {P.shape}, G {G.shape}, T {T.shape}, grilla {grid.points.size}",
            field="propagate",
        )
    if np.shape(alpha) != (n_ch,) or np.shape(direction) != (n_ch,):
        raise ScenarioError("alpha y direction deben tener un valor por canal", field="propagate")

    d = np.asarray(direction, dtype=float)[:, np.newaxis]
    a = np.asarray(alpha, dtype=float)[:, np.newaxis]
    z = grid.points[np.newaxis, :]

    with np.errstate(over="ignore", invalid="ignore"):
        exponent = d * ((G @ P) @ T * grid.step - a * z)
        return P[:, :1] * np.exp(exponent)
