"""
Punto de entrada público del solver: método híbrido con escalera de
factores de bomba.

Si una corrida diverge, se repite desde cero con el siguiente divisor de
bombas de params.factors_pump. La primera corrida que no diverge es la
que se reporta.

Uso:
    from raman.solver import run_with_pump_factor_escalation
    P, report = run_with_pump_factor_escalation(scenario, SolverParams())
"""
from __future__ import annotations

import logging

import numpy as np

from .hybrid import run_hybrid
from .link import LinkScenario
from .state import SolverParams, SolverReport, Status

logger = logging.getLogger(__name__)


def run_with_pump_factor_escalation(
    scenario: LinkScenario,
    params: SolverParams | None = None,
) -> tuple[np.ndarray, SolverReport]:
    """
    Ejecuta el método híbrido probando la escalera de factores en orden.

    Args:
        scenario: Escenario del enlace.
        params: Parámetros; por defecto SolverParams().

    Returns:
        tuple: (perfil, reporte). Si todos los factores divergen, el
            reporte del último intento con divergence_flag=True.
    """
    params = params or SolverParams()
    total_time = 0.0
    profile, report = None, None

    for factor in params.factors_pump:
        logger.info(f"[{scenario.label}] Intentando con factor de bombas {factor:g}")
        profile, report = run_hybrid(scenario, params, factor_pump=factor)
        total_time += report.wall_time
        if report.status != Status.DIVERGED:
            report.wall_time = total_time
            return profile, report
        logger.warning(f"[{scenario.label}] Divergió con factor {factor:g}")

    report.wall_time = total_time
    report.divergence_flag = True
    report.message = f"Divergió con todos los factores {list(params.factors_pump)}: {report.message}"
    logger.error(f"[{scenario.label}] Escalera de factores agotada")
    return profile, report
