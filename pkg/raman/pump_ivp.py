"""
Perfil inicial de las bombas como problema de valor inicial.

Las bombas contra-propagantes se integran desde z = L (donde valen su
borde escalado) hacia z = 0, considerando solo la interacción Raman
entre bombas. Se integra en s = L - z para avanzar con pasos positivos.

También expone el integrador RK4 de paso fijo que usa el oráculo.
"""
from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from config import RK4_SUBSTEPS
from .common import DivergenceError, IntegrationError
from .link import Grid, LinkScenario, build_coupling_matrix

logger = logging.getLogger(__name__)


# =============================================================================
# INTEGRADOR RK4
# =============================================================================

def rk4_march(
    rhs: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    nodes: np.ndarray,
    substeps: int = RK4_SUBSTEPS,
) -> np.ndarray:
    """
    Integra un sistema autónomo y' = rhs(y) con RK4 clásico de paso fijo.

    Cada intervalo [nodes[m], nodes[m+1]] se divide en `substeps` pasos
    iguales; la solución se devuelve muestreada en los nodos.

    Args:
        rhs: Lado derecho del sistema.
        y0: Estado en nodes[0].
        nodes: Coordenadas crecientes de muestreo.
        substeps: Pasos RK4 por intervalo.

    Returns:
        np.ndarray: Estados (len(nodes) × dim).

    Raises:
        IntegrationError: Si aparece un valor no finito.
    """
    y = np.array(y0, dtype=float)
    out = np.empty((len(nodes), y.size))
    out[0] = y

    for m in range(len(nodes) - 1):
        h = (nodes[m + 1] - nodes[m]) / substeps
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(substeps):
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("RK4 produjo valores no finitos", z_km=float(nodes[m + 1]))
        out[m + 1] = y

    return out


def raman_rhs(G: np.ndarray, alpha: np.ndarray, sign: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """
    Lado derecho de las ecuaciones Raman acopladas.

    dP/dx = sign · P · (-α + G·P), con sign = ±1 por canal según el
    sentido de la coordenada de integración.
    """
    def rhs(p: np.ndarray) -> np.ndarray:
        return sign * p * (G @ p - alpha)
    return rhs


# =============================================================================
# SOLO BOMBAS
# =============================================================================

def solve_pump_only(
    scenario: LinkScenario,
    grid: Grid,
    scaled_pump_boundary: np.ndarray,
    substeps: int = RK4_SUBSTEPS,
) -> np.ndarray:
    """
    Resuelve el perfil de las bombas con acople solo entre bombas.

    Args:
        scenario: Escenario con al menos una bomba.
        grid: Grilla espacial.
        scaled_pump_boundary: Potencia de cada bomba en z=L (W).
        substeps: Subpasos RK4 por intervalo de la grilla.

    Returns:
        np.ndarray: Filas de las bombas (N × N_g) en el orden de la grilla.

    Raises:
        DivergenceError: Si la integración produce NaN/Inf.
    """
    pumps = scenario.pump_index
    boundary = np.asarray(scaled_pump_boundary, dtype=float)
    if pumps.size == 0:
        raise ValueError("El escenario no tiene bombas")
    if boundary.shape != (pumps.size,) or np.any(boundary <= 0):
        raise ValueError("Se requiere una potencia de borde positiva por bomba")

    G = build_coupling_matrix(scenario)[np.ix_(pumps, pumps)]
    alpha = scenario.alphas[pumps]

    # En s = L - z una onda Backward avanza: d/ds = -d/dz
    sign = -scenario.directions[pumps]
    s_nodes = grid.length - grid.points[::-1]
    # Evitar ruido de redondeo en el primer nodo
    s_nodes[0] = 0.0

    try:
        rows = rk4_march(raman_rhs(G, alpha, sign), boundary, s_nodes, substeps)
    except IntegrationError as e:
        raise DivergenceError(f"Inicialización de bombas divergente: {e}") from e

    profile = rows[::-1].T.copy()
    profile[:, -1] = boundary
    logger.debug(f"Perfil solo-bombas: P(0) = {profile[:, 0]}")
    return profile
