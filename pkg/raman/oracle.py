"""
Solver de referencia independiente: método de disparo sobre el problema
de contorno completo, integrado con RK4 de paso fijo.

No comparte código con el núcleo integral (propagate); solo reutiliza el
integrador RK4 y el lado derecho de las ecuaciones. Sirve para verificar
el método híbrido y para medir su ganancia de tiempo.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from config import (
    DEFAULT_TOL_W,
    RK4_SUBSTEPS,
    SHOOTING_BACKOFF,
    SHOOTING_DAMPING,
    SHOOTING_MAX_BACKOFFS,
    SHOOTING_MAX_OUTER,
)
from .common import ComparisonError, DivergenceError, IntegrationError
from .link import Grid, LinkScenario, build_coupling_matrix
from .pump_ivp import raman_rhs, rk4_march, solve_pump_only

logger = logging.getLogger(__name__)


@dataclass
class ShootingResult:
    """
    Resultado del método de disparo.

    Attributes:
        profile: Último perfil integrado (N_ch × N_g); None si ninguna integración terminó.
        converged: El residuo quedó bajo la tolerancia.
        iterations: Integraciones completas realizadas.
        residuals: max|residuo| por iteración (W).
        message: Diagnóstico legible.
    """
    profile: np.ndarray | None
    converged: bool
    iterations: int = 0
    residuals: list[float] = field(default_factory=list)
    message: str = ""


def forward_integrate(
    scenario: LinkScenario,
    grid: Grid,
    z0_values: np.ndarray,
    substeps: int = RK4_SUBSTEPS,
) -> np.ndarray:
    """
    Integra el sistema acoplado completo desde z=0 hasta z=L.

    Todos los canales avanzan juntos con su signo de sentido:
    dP/dz = d · P · (G·P − α).

    Args:
        scenario: Escenario del enlace.
        grid: Grilla de muestreo.
        z0_values: Potencia de cada canal en z=0 (W), estrictamente positiva.
        substeps: Subpasos RK4 por intervalo.

    Returns:
        np.ndarray: Perfil muestreado (N_ch × N_g).

    Raises:
        ValueError: Si z0_values no es positivo o no tiene N_ch valores.
        IntegrationError: Si aparecen valores no finitos (con la z donde falló).
    """
    y0 = np.asarray(z0_values, dtype=float)
    if y0.shape != (scenario.n_channels,) or np.any(y0 <= 0):
        raise ValueError("z0_values debe tener una potencia positiva por canal")

    rhs = raman_rhs(build_coupling_matrix(scenario), scenario.alphas, scenario.directions)
    return rk4_march(rhs, y0, grid.points, substeps).T


def solve_bvp_shooting(
    scenario: LinkScenario,
    grid: Grid,
    tol: float = DEFAULT_TOL_W,
    max_outer: int = SHOOTING_MAX_OUTER,
    damping: float = SHOOTING_DAMPING,
    substeps: int = RK4_SUBSTEPS,
    backoff: float = SHOOTING_BACKOFF,
    max_backoffs: int = SHOOTING_MAX_BACKOFFS,
) -> ShootingResult:
    """
    Resuelve el problema de contorno por disparo sobre las bombas en z=0.

    Las incógnitas son los valores de las bombas en z=0. La estimación
    inicial sale del problema solo-bombas; en cada iteración se integra
    hacia adelante y cada incógnita se multiplica por (borde/P_L)^damping.
    Si la integración desborda, las bombas en z=0 se reducen por backoff
    y se vuelve a intentar, hasta max_backoffs veces seguidas.

    Args:
        scenario: Escenario del enlace.
        grid: Grilla de muestreo.
        tol: Tolerancia sobre max|P_L − borde| (W).
        max_outer: Iteraciones externas máximas.
        damping: Exponente λ de la actualización.
        substeps: Subpasos RK4 por intervalo.
        backoff: Factor de reducción de las bombas ante desborde.
        max_backoffs: Reducciones consecutivas permitidas.

    Returns:
        ShootingResult: Nunca lanza por fallas numéricas; converged=False
            con el diagnóstico en message.
    """
    pumps = scenario.pump_index
    boundary = scenario.boundary_powers[pumps]
    z0 = scenario.boundary_powers.copy()

    if pumps.size:
        try:
            z0[pumps] = solve_pump_only(scenario, grid, boundary, substeps)[:, 0]
        except DivergenceError as e:
            logger.warning(f"[{scenario.label}] Oráculo: estimación inicial divergente")
            return ShootingResult(None, False, message=str(e))

    result = ShootingResult(None, False)
    backoffs = 0
    for outer in range(1, max_outer + 1):
        try:
            profile = forward_integrate(scenario, grid, z0, substeps)
        except IntegrationError as e:
            if not pumps.size or backoffs >= max_backoffs:
                result.message = f"Integración fallida en iteración {outer}: {e}"
                logger.warning(f"[{scenario.label}] Oráculo: {result.message}")
                return result
            backoffs += 1
            z0[pumps] *= backoff
            logger.warning(
                f"[{scenario.label}] Oráculo: integración desbordada en iteración {outer}, "
                f"bombas en z=0 reducidas ×{backoff} ({backoffs}/{max_backoffs})"
            )
            continue
        backoffs = 0

        result.profile = profile
        result.iterations = outer
        end = profile[pumps, -1]
        residual = float(np.max(np.abs(end - boundary))) if pumps.size else 0.0
        result.residuals.append(residual)
        logger.debug(f"Disparo {outer}: residuo {residual:.3e} W")

        if residual < tol:
            result.converged = True
            result.message = f"Convergió en {outer} iteraciones"
            return result
        if np.any(end <= 0):
            result.message = f"Bombas no positivas en z=L (iteración {outer})"
            logger.warning(f"[{scenario.label}] Oráculo: {result.message}")
            return result

        z0[pumps] *= (boundary / end) ** damping

    last = f"residuo {result.residuals[-1]:.3e} W" if result.residuals else "sin integraciones completas"
    result.message = f"Sin converger tras {max_outer} iteraciones ({last})"
    logger.warning(f"[{scenario.label}] Oráculo: {result.message}")
    return result


def max_db_error(a: np.ndarray, b: np.ndarray) -> float:
    """
    Máxima diferencia absoluta en dB entre dos perfiles.

    Args:
        a: Perfil (W).
        b: Perfil de las mismas dimensiones (W).

    Returns:
        float: max |10·log10(a/b)| sobre todos los canales y puntos.

    Raises:
        ComparisonError: Si las dimensiones difieren o hay entradas no
            positivas o no finitas.

    Example:
        >>> round(max_db_error(np.ones((2, 3)), 2 * np.ones((2, 3))), 4)
        3.0103
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ComparisonError(f"dimensiones distintas: {a.shape} vs {b.shape}")
    for name, m in (("a", a), ("b", b)):
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ComparisonError(f"el perfil {name} tiene entradas no positivas o no finitas")
    return float(np.max(np.abs(10.0 * np.log10(a / b))))
