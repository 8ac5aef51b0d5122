"""
Tipos del solver híbrido: parámetros, estado de una corrida y reporte.

Uso:
    from raman.state import SolverParams, SolverReport, Status
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from config import DEFAULT_FACTORS_PUMP, DEFAULT_MAX_ITERATIONS, DEFAULT_TOL_W
from .common import ScenarioError


# =============================================================================
# ENUMERACIONES
# =============================================================================

class Status(str, Enum):
    """Clasificación del resultado de una corrida."""
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    OSCILLATING = "Oscillating"
    ITERATION_CAPPED = "IterationCapped"


class Stage(str, Enum):
    """Etapa del método híbrido."""
    SIGNAL_SCALE_UP = "SignalScaleUp"
    PUMP_SCALE_UP = "PumpScaleUp"
    DPC = "Dpc"


# =============================================================================
# PARÁMETROS
# =============================================================================

@dataclass(frozen=True)
class SolverParams:
    """
    Parámetros ajustables del método híbrido.

    Attributes:
        ch: Factor de corrección ante sobre-cálculo de una bomba.
        cl_initial: Factor de corrección inicial ante sub-cálculo.
        step_dbm_signal: Paso de subida de las señales (dB).
        step_dbm_pump: Paso de subida de las bombas (dB).
        factor_signal: Divisor lineal inicial de las señales.
        factors_pump: Escalera de divisores de bomba (empieza en 1).
        tol: Tolerancia sobre el error de borde de las bombas (W).
        max_iterations: Número de corte (una iteración = una propagación).
        oscillation_check_interval: Cada cuántas iteraciones se busca oscilación.
        magnitude_thresh: Fracción de max|ventana| que vuelve significativo un pico.
        peaks_thresh: Picos significativos a superar para reducir CL.
        c0: Constante de proporcionalidad de la reducción de CL.
    """
    ch: float = 3.0
    cl_initial: float = 0.1
    step_dbm_signal: float = 2.0
    step_dbm_pump: float = 0.5
    factor_signal: float = 4.0
    factors_pump: tuple[float, ...] = DEFAULT_FACTORS_PUMP
    tol: float = DEFAULT_TOL_W
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    oscillation_check_interval: int = 100
    magnitude_thresh: float = 0.3
    peaks_thresh: int = 2
    c0: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors_pump", tuple(float(f) for f in self.factors_pump))
        scalars = {
            "ch": self.ch,
            "cl_initial": self.cl_initial,
            "step_dbm_signal": self.step_dbm_signal,
            "step_dbm_pump": self.step_dbm_pump,
            "factor_signal": self.factor_signal,
            "tol": self.tol,
            "max_iterations": self.max_iterations,
            "oscillation_check_interval": self.oscillation_check_interval,
            "magnitude_thresh": self.magnitude_thresh,
            "c0": self.c0,
        }
        for name, value in scalars.items():
            if not value > 0:
                raise ScenarioError(f"debe ser positivo ({value})", field=name)
        if self.peaks_thresh < 1:
            raise ScenarioError("debe ser ≥ 1", field="peaks_thresh")
        ladder = np.asarray(self.factors_pump)
        if ladder.size == 0 or ladder[0] != 1.0 or np.any(np.diff(ladder) <= 0):
            raise ScenarioError("la escalera debe empezar en 1 y ser estrictamente creciente", field="factors_pump")

    def with_overrides(self, **overrides) -> SolverParams:
        """Copia con los campos dados reemplazados (se ignoran los None)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# =============================================================================
# ESTADO Y TRAZA
# =============================================================================

@dataclass(frozen=True)
class TraceRecord:
    """Una iteración: índice, etapa y error de cada bomba (W)."""
    iteration: int
    stage: Stage
    pump_error: tuple[float, ...]


@dataclass
class SolverState:
    """
    Estado mutable de una corrida, propiedad exclusiva de esa corrida.

    Attributes:
        profile: Perfil actual (N_ch × N_g).
        stage: Etapa en curso.
        signal_scaled_up: Las señales ya alcanzaron su borde.
        pump_boundary_scaled: Borde escalado actual de cada bomba (W).
        cl_current: Factor CL vigente.
        last_change: Iteración del último ajuste de CL.
        iteration: Propagaciones realizadas.
        trace: Registro por iteración.
        cl_history: (iteración, nuevo CL) por cada reducción.
        oscillation_detected: El detector disparó al menos una vez.
    """
    profile: np.ndarray
    stage: Stage
    pump_boundary_scaled: np.ndarray
    cl_current: float
    signal_scaled_up: bool = False
    last_change: int = 0
    iteration: int = 0
    trace: list[TraceRecord] = field(default_factory=list)
    cl_history: list[tuple[int, float]] = field(default_factory=list)
    oscillation_detected: bool = False

    def first_pump_error_window(self) -> np.ndarray:
        """Errores de la primera bomba en DPC desde last_change hasta la iteración actual."""
        return np.array([
            rec.pump_error[0]
            for rec in self.trace
            if rec.stage == Stage.DPC and rec.pump_error and self.last_change <= rec.iteration <= self.iteration
        ])


# =============================================================================
# REPORTE
# =============================================================================

@dataclass
class SolverReport:
    """
    Resultado de una corrida del método híbrido.

    Attributes:
        status: Clasificación final.
        iterations: Propagaciones realizadas.
        final_pump_error: Error de borde de cada bomba (W).
        pump_factor_used: Divisor de bombas de la corrida reportada.
        cl_history: Reducciones de CL (iteración, nuevo valor).
        wall_time: Tiempo de resolución (s).
        divergence_flag: La escalera de factores se agotó sin éxito.
        message: Motivo legible del resultado.
        trace: Traza por iteración.
    """
    status: Status
    iterations: int
    final_pump_error: np.ndarray
    pump_factor_used: float
    cl_history: list[tuple[int, float]] = field(default_factory=list)
    wall_time: float = 0.0
    divergence_flag: bool = False
    message: str = ""
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == Status.CONVERGED

    def max_abs_error(self) -> float:
        """max|error| de las bombas (0 sin bombas, NaN si hay valores no finitos)."""
        err = np.asarray(self.final_pump_error, dtype=float)
        if err.size == 0:
            return 0.0
        return float(np.max(np.abs(err)))
