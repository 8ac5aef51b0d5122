"""
Método híbrido: inyección progresiva de señales seguida de calibración
dinámica de bombas.

Flujo de una corrida:
    1. SignalScaleUp: las señales arrancan divididas por factor_signal y
       suben step_dbm_signal por iteración hasta su borde real.
    2. PumpScaleUp: las bombas (y su borde escalado) suben step_dbm_pump
       por iteración hasta el borde real.
    3. DPC: cada bomba se corrige en proporción a su error de borde hasta
       que max|error| < tol.

Una iteración es una llamada a propagate. Las fallas nunca se propagan
como excepción: quedan codificadas en SolverReport.status.
"""
from __future__ import annotations

import logging
import time

import numpy as np

from .adaptive import is_oscillating, maybe_reduce_cl
from .common import DivergenceError, ScenarioError, db_step_gain
from .link import Grid, LinkScenario, build_coupling_matrix, build_grid
from .propagator import propagate, trapezoid_operator
from .pump_ivp import solve_pump_only
from .state import SolverParams, SolverReport, SolverState, Stage, Status, TraceRecord

logger = logging.getLogger(__name__)


MULTIPLIER_FLOOR = 1e-3
"""Piso del multiplicador de DPC; evita cambios de signo en las bombas."""


# =============================================================================
# OPERACIONES ELEMENTALES
# =============================================================================

def initialize_state(
    scenario: LinkScenario,
    grid: Grid,
    params: SolverParams,
    factor_pump: float,
) -> SolverState:
    """
    Arma el perfil inicial escalado hacia abajo.

    Las señales decaen solo por atenuación desde borde/factor_signal; las
    bombas salen del problema solo-bombas con el borde dividido por
    factor_pump.

    Args:
        scenario: Escenario del enlace.
        grid: Grilla espacial.
        params: Parámetros del solver.
        factor_pump: Divisor de bombas (un elemento de params.factors_pump).

    Returns:
        SolverState: Estado en etapa SignalScaleUp.

    Raises:
        ScenarioError: Si factor_pump no pertenece a la escalera.
        DivergenceError: Si la inicialización de bombas diverge.
    """
    if factor_pump not in params.factors_pump:
        raise ScenarioError(f"{factor_pump} no está en {params.factors_pump}", field="factor_pump")

    sig, pumps = scenario.signal_index, scenario.pump_index
    P = np.empty((scenario.n_channels, grid.points.size))

    start = scenario.boundary_powers[sig] / params.factor_signal
    P[sig, :] = start[:, np.newaxis] * np.exp(-np.outer(scenario.alphas[sig], grid.points))

    scaled = scenario.boundary_powers[pumps] / factor_pump
    if pumps.size:
        P[pumps, :] = solve_pump_only(scenario, grid, scaled)

    return SolverState(
        profile=P,
        stage=Stage.SIGNAL_SCALE_UP,
        pump_boundary_scaled=scaled,
        cl_current=params.cl_initial,
    )


def correct_pumps_to_boundary(
    P: np.ndarray,
    pump_index: np.ndarray,
    pump_boundary_scaled: np.ndarray,
) -> np.ndarray:
    """
    Escala cada fila de bomba para que en z=L valga exactamente su borde.

    Args:
        P: Perfil actual.
        pump_index: Filas de las bombas.
        pump_boundary_scaled: Borde (escalado) de cada bomba (W).

    Returns:
        np.ndarray: Perfil corregido (copia).

    Raises:
        DivergenceError: Si algún P[bomba, L] es cero o no finito.
    """
    out = P.copy()
    if pump_index.size == 0:
        return out

    end = P[pump_index, -1]
    if not np.all(np.isfinite(end)) or np.any(end <= 0):
        raise DivergenceError(f"Bombas no corregibles en z=L: {end}")

    out[pump_index, :] *= (pump_boundary_scaled / end)[:, np.newaxis]
    out[pump_index, -1] = pump_boundary_scaled
    return out


def pump_error(P: np.ndarray, pump_index: np.ndarray, true_boundary: np.ndarray) -> np.ndarray:
    """
    Error de borde de cada bomba: borde real menos valor calculado en z=L.

    Positivo: la bomba quedó sub-calculada. Negativo: sobre-calculada.
    """
    return np.asarray(true_boundary, dtype=float) - P[pump_index, -1]


def dpc_correction(
    P: np.ndarray,
    pump_index: np.ndarray,
    error: np.ndarray,
    true_boundary: np.ndarray,
    params: SolverParams,
    cl: float | None = None,
) -> np.ndarray:
    """
    Corrige las filas de bombas en proporción a su error normalizado.

    Multiplicador por bomba: 1 + k·error/borde, con k = CL si error > 0 y
    k = CH si no, acotado inferiormente por MULTIPLIER_FLOOR. Las filas de
    señal no se tocan.

    Args:
        P: Perfil actual.
        pump_index: Filas de las bombas.
        error: Error de borde por bomba (W).
        true_boundary: Borde real por bomba (W).
        params: Parámetros (aporta CH y CL inicial).
        cl: CL vigente; por defecto params.cl_initial.

    Returns:
        np.ndarray: Perfil corregido (copia).
    """
    cl = params.cl_initial if cl is None else cl
    err = np.asarray(error, dtype=float)
    k = np.where(err > 0, cl, params.ch)
    multiplier = np.maximum(1.0 + k * err / np.asarray(true_boundary, dtype=float), MULTIPLIER_FLOOR)

    out = P.copy()
    out[pump_index, :] *= multiplier[:, np.newaxis]
    return out


# =============================================================================
# CORRIDA COMPLETA
# =============================================================================

class _IterationCap(Exception):
    """Se alcanzó max_iterations."""


class HybridRun:
    """
    Una corrida del método híbrido sobre un escenario.

    Guarda las matrices fijas (G, T, α, sentidos) y el estado mutable.
    No comparte nada con otras corridas.
    """

    def __init__(self, scenario: LinkScenario, params: SolverParams, factor_pump: float):
        self.scenario = scenario
        self.params = params
        self.factor_pump = factor_pump
        self.grid = build_grid(scenario.length, scenario.step)
        self.G = build_coupling_matrix(scenario)
        self.T = trapezoid_operator(self.grid)
        self.sig = scenario.signal_index
        self.pumps = scenario.pump_index
        self.signal_target = scenario.boundary_powers[self.sig]
        self.true_boundary = scenario.boundary_powers[self.pumps]
        self.state: SolverState | None = None

    # -------------------------------------------------------------------------

    def _propagate(self) -> None:
        st = self.state
        if st.iteration >= self.params.max_iterations:
            raise _IterationCap()
        P = propagate(st.profile, self.G, self.scenario.alphas, self.scenario.directions, self.grid, self.T)
        st.iteration += 1
        if not np.all(np.isfinite(P)):
            raise DivergenceError(f"NaN/Inf en el perfil (iteración {st.iteration}, etapa {st.stage.value})")
        st.profile = P

    def _record(self, reference: np.ndarray) -> np.ndarray:
        st = self.state
        err = pump_error(st.profile, self.pumps, reference)
        st.trace.append(TraceRecord(st.iteration, st.stage, tuple(float(e) for e in err)))
        return err

    def _correct_pumps(self) -> None:
        st = self.state
        st.profile = correct_pumps_to_boundary(st.profile, self.pumps, st.pump_boundary_scaled)

    # -------------------------------------------------------------------------

    def _signal_scale_up(self) -> None:
        st = self.state
        gain = db_step_gain(self.params.step_dbm_signal)
        while not st.signal_scaled_up:
            self._correct_pumps()

            anchors = st.profile[self.sig, 0]
            target = np.minimum(anchors * gain, self.signal_target)
            st.profile[self.sig, :] *= (target / anchors)[:, np.newaxis]
            st.profile[self.sig, 0] = target

            self._propagate()
            self._record(st.pump_boundary_scaled)
            if np.all(st.profile[self.sig, 0] >= self.signal_target):
                st.signal_scaled_up = True

        st.stage = Stage.PUMP_SCALE_UP
        logger.info(f"Señales en su borde tras {st.iteration} iteraciones; subiendo bombas")

    def _pump_scale_up(self) -> None:
        st = self.state
        gain = db_step_gain(self.params.step_dbm_pump)
        while st.stage == Stage.PUMP_SCALE_UP:
            self._correct_pumps()
            gap = np.abs(st.pump_boundary_scaled - self.true_boundary)
            if np.any(gap > self.params.tol):
                target = np.minimum(st.pump_boundary_scaled * gain, self.true_boundary)
                st.profile[self.pumps, :] *= (target / st.pump_boundary_scaled)[:, np.newaxis]
                st.pump_boundary_scaled = target
                self._propagate()
                self._record(st.pump_boundary_scaled)
            else:
                # Traspaso a DPC: el borde escalado pasa a ser exactamente el real
                st.pump_boundary_scaled = self.true_boundary.copy()
                self._correct_pumps()
                self._propagate()
                st.stage = Stage.DPC

        logger.info(f"Bombas en su borde real tras {st.iteration} iteraciones; iniciando DPC")

    def _dpc(self) -> tuple[Status, str]:
        st = self.state
        params = self.params
        while True:
            err = self._record(self.true_boundary)
            if err.size == 0 or np.max(np.abs(err)) < params.tol:
                return Status.CONVERGED, f"Convergió en {st.iteration} iteraciones"

            logger.debug(f"Iteración {st.iteration}: error de bombas {err}")
            if st.iteration > 0 and st.iteration % params.oscillation_check_interval == 0:
                maybe_reduce_cl(st, params)

            st.profile = dpc_correction(st.profile, self.pumps, err, self.true_boundary, params, st.cl_current)
            self._propagate()

    def _classify_cap(self) -> tuple[Status, str]:
        st = self.state
        if st.oscillation_detected or is_oscillating(st.first_pump_error_window(), self.params):
            return Status.OSCILLATING, f"Oscilación sin converger tras {st.iteration} iteraciones"
        return Status.ITERATION_CAPPED, f"Sin converger tras {st.iteration} iteraciones"

    # -------------------------------------------------------------------------

    def run(self) -> tuple[np.ndarray, SolverReport]:
        """Ejecuta las tres etapas y arma el reporte."""
        t0 = time.perf_counter()
        try:
            self.state = initialize_state(self.scenario, self.grid, self.params, self.factor_pump)
            self._signal_scale_up()
            self._pump_scale_up()
            status, message = self._dpc()
        except DivergenceError as e:
            status, message = Status.DIVERGED, str(e)
        except _IterationCap:
            status, message = self._classify_cap()
        wall = time.perf_counter() - t0

        st = self.state
        if st is None:
            profile = np.full((self.scenario.n_channels, self.grid.points.size), np.nan)
            final_error = np.full(self.pumps.size, np.nan)
            iterations, cl_history, trace = 0, [], []
        else:
            profile = st.profile
            with np.errstate(invalid="ignore"):
                final_error = pump_error(profile, self.pumps, self.true_boundary)
            iterations, cl_history, trace = st.iteration, st.cl_history, st.trace

        if status == Status.CONVERGED:
            logger.info(f"[{self.scenario.label}] {message} (factor {self.factor_pump:g}, {wall:.3f}s)")
        else:
            logger.warning(f"[{self.scenario.label}] {status.value}: {message} (factor {self.factor_pump:g})")

        report = SolverReport(
            status=status,
            iterations=iterations,
            final_pump_error=final_error,
            pump_factor_used=self.factor_pump,
            cl_history=list(cl_history),
            wall_time=wall,
            message=message,
            trace=list(trace),
        )
        return profile, report


def run_hybrid(
    scenario: LinkScenario,
    params: SolverParams | None = None,
    factor_pump: float | None = None,
) -> tuple[np.ndarray, SolverReport]:
    """
    Resuelve el perfil de potencia con el método híbrido.

    Args:
        scenario: Escenario del enlace.
        params: Parámetros; por defecto SolverParams().
        factor_pump: Divisor de bombas; por defecto el primero de la escalera.

    Returns:
        tuple: (perfil N_ch × N_g en W, SolverReport).
    """
    params = params or SolverParams()
    factor = params.factors_pump[0] if factor_pump is None else float(factor_pump)
    return HybridRun(scenario, params, factor).run()
