"""
Modelo del enlace: canales, tramo de fibra, matriz de acople Raman y
constructores de los escenarios de prueba C+L y C+L+S.

Convenciones de unidades:
    - frecuencias en THz
    - distancias en km
    - atenuación en 1/km (lineal)
    - ganancia Raman normalizada en 1/(W·km)
    - potencias en W

Todos los tipos son inmutables después de construidos, por lo que
pueden compartirse entre corridas concurrentes del solver.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property

import numpy as np

from config import (
    CHANNEL_SPACING_GHZ,
    DEFAULT_ATTENUATION_DB_KM,
    DEFAULT_LENGTH_KM,
    DEFAULT_STEP_KM,
    RAMAN_CUTOFF_THZ,
    RAMAN_PEAK_GAIN,
    RAMAN_PEAK_SHIFT_THZ,
)
from .common import ScenarioError, db_per_km_to_linear, dbm_to_watt, from_dbm


# =============================================================================
# CONSTANTES DE LOS ESCENARIOS
# =============================================================================

CL_PUMP_FREQUENCIES_THZ = (210.56, 208.87, 206.72, 204.51, 200.55)
"""Frecuencias de las 5 bombas contra-propagantes del sistema C+L."""

CLS_PUMP_FREQUENCIES_THZ = (215.56, 213.87, 211.72, 209.51, 205.55)
"""Mismas bombas corridas 5 THz para dejar lugar a la banda S."""

REFERENCE_PUMP_POWERS_MW = (360.0, 320.0, 200.0, 130.0, 180.0)
"""Potencias originales de las bombas (mW), en el orden de las frecuencias."""

BAND_CHANNELS = 38
"""Canales por banda (C, L y S)."""

CL_START_THZ = 186.0
"""Primer canal del peine C+L."""

S_START_THZ = 196.0
"""Primer canal de la banda S."""


# =============================================================================
# TIPOS DE DATOS
# =============================================================================

class Direction(IntEnum):
    """Sentido de propagación; el valor es el signo en la ecuación Raman."""
    FORWARD = 1
    BACKWARD = -1


class BoundaryEnd(str, Enum):
    """Extremo de la fibra donde se impone la potencia de borde."""
    START = "start"
    END = "end"


@dataclass(frozen=True)
class ChannelSpec:
    """
    Un canal de señal o bomba.

    Attributes:
        center_frequency: Frecuencia central (THz).
        direction: Sentido de propagación.
        attenuation: Pérdida lineal (1/km).
        boundary_power: Potencia impuesta en el extremo de inyección (W).
        boundary_end: Extremo de inyección; se deduce del sentido si se omite.
    """
    center_frequency: float
    direction: Direction
    attenuation: float
    boundary_power: float
    boundary_end: BoundaryEnd | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "direction", Direction(self.direction))
        expected = BoundaryEnd.START if self.direction == Direction.FORWARD else BoundaryEnd.END
        if self.boundary_end is None:
            object.__setattr__(self, "boundary_end", expected)
        elif self.boundary_end != expected:
            raise ScenarioError(
                f"un canal {self.direction.name} debe inyectarse en {expected.value}",
                field="boundary_end",
            )
        if not self.center_frequency > 0:
            raise ScenarioError(f"frecuencia no positiva: {self.center_frequency}", field="center_frequency")
        if not self.attenuation >= 0:
            raise ScenarioError(f"atenuación negativa: {self.attenuation}", field="attenuation")
        if not self.boundary_power > 0:
            raise ScenarioError(f"potencia de borde no positiva: {self.boundary_power}", field="boundary_power")


@dataclass(frozen=True)
class RamanGainModel:
    """
    Espectro de ganancia Raman normalizado, lineal por tramos.

    Attributes:
        shift_grid: Corrimientos de frecuencia (THz), ascendentes desde 0.
        gain_values: Ganancia en cada corrimiento (1/(W·km)).
        frequency_scaling: Aplicar el factor fotónico f_i/f_j del lado de la pérdida.
    """
    shift_grid: tuple[float, ...]
    gain_values: tuple[float, ...]
    frequency_scaling: bool = True

    def __post_init__(self) -> None:
        grid = np.asarray(self.shift_grid, dtype=float)
        values = np.asarray(self.gain_values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.size != values.size:
            raise ScenarioError("shift_grid y gain_values deben tener el mismo largo (≥ 2)", field="raman")
        if grid[0] != 0.0 or values[0] != 0.0:
            raise ScenarioError("el espectro debe empezar en corrimiento 0 con ganancia 0", field="raman")
        if np.any(np.diff(grid) <= 0):
            raise ScenarioError("shift_grid debe ser estrictamente ascendente", field="raman.shift_thz")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ScenarioError("la ganancia debe ser finita y no negativa", field="raman.gain")

    def gain(self, shift_thz: np.ndarray | float) -> np.ndarray:
        """Evalúa g_R en los corrimientos dados (nula más allá de la grilla)."""
        return np.interp(np.abs(shift_thz), self.shift_grid, self.gain_values, right=0.0)


def triangular_gain_model(
    peak: float = RAMAN_PEAK_GAIN,
    peak_shift: float = RAMAN_PEAK_SHIFT_THZ,
    cutoff: float = RAMAN_CUTOFF_THZ,
    frequency_scaling: bool = True,
) -> RamanGainModel:
    """
    Aproximación triangular del espectro Raman de la sílice.

    Sube linealmente de 0 hasta `peak` en `peak_shift` y cae a 0 en `cutoff`.
    """
    if not 0 < peak_shift < cutoff:
        raise ScenarioError("se requiere 0 < peak_shift < cutoff", field="raman")
    return RamanGainModel((0.0, peak_shift, cutoff), (0.0, peak, 0.0), frequency_scaling)


def zero_gain_model() -> RamanGainModel:
    """Modelo sin acople Raman (solo atenuación)."""
    return RamanGainModel((0.0, 1.0), (0.0, 0.0), frequency_scaling=False)


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Grilla espacial Z = [0, ΔZ, ..., L].

    Attributes:
        points: Posiciones (km), la última es exactamente L.
        step: Paso nominal ΔZ (km).
    """
    points: np.ndarray
    step: float

    @property
    def n_steps(self) -> int:
        return len(self.points) - 1

    @property
    def length(self) -> float:
        return float(self.points[-1])


@dataclass(frozen=True)
class LinkScenario:
    """
    Descripción completa de un tramo.

    Attributes:
        channels: Canales ordenados por frecuencia ascendente.
        length: Largo de la fibra (km).
        step: Paso espacial ΔZ (km).
        gain_model: Espectro de ganancia Raman.
        label: Identificador legible usado en los reportes.
    """
    channels: tuple[ChannelSpec, ...]
    length: float
    step: float
    gain_model: RamanGainModel
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.channels:
            raise ScenarioError("el escenario no tiene canales", field="channels")
        if not (self.length > 0 and self.step > 0):
            raise ScenarioError("length y step deben ser positivos", field="link")
        if self.step > self.length:
            raise ScenarioError("step no puede superar length", field="link.step_km")

        freqs = np.array([ch.center_frequency for ch in self.channels])
        if np.any(np.diff(freqs) <= 0):
            raise ScenarioError("los canales deben estar ordenados por frecuencia sin duplicados", field="channels")

        directions = np.array([int(ch.direction) for ch in self.channels])
        if not np.any(directions == Direction.FORWARD):
            raise ScenarioError("se requiere al menos un canal de señal", field="signals")
        # Señales y bombas forman bloques contiguos: a lo sumo un cambio de sentido
        if np.count_nonzero(np.diff(directions)) > 1:
            raise ScenarioError("señales y bombas deben formar bloques contiguos", field="channels")

    @cached_property
    def frequencies(self) -> np.ndarray:
        return _readonly([ch.center_frequency for ch in self.channels])

    @cached_property
    def alphas(self) -> np.ndarray:
        return _readonly([ch.attenuation for ch in self.channels])

    @cached_property
    def directions(self) -> np.ndarray:
        return _readonly([float(ch.direction) for ch in self.channels])

    @cached_property
    def boundary_powers(self) -> np.ndarray:
        return _readonly([ch.boundary_power for ch in self.channels])

    @cached_property
    def signal_index(self) -> np.ndarray:
        return np.flatnonzero(self.directions > 0)

    @cached_property
    def pump_index(self) -> np.ndarray:
        return np.flatnonzero(self.directions < 0)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def n_signals(self) -> int:
        return int(self.signal_index.size)

    @property
    def n_pumps(self) -> int:
        return int(self.pump_index.size)


def _readonly(values: Sequence[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


# =============================================================================
# OPERACIONES
# =============================================================================

def build_grid(length: float, step: float) -> Grid:
    """
    Construye la grilla Z con N_z = ⌈L/ΔZ⌉ intervalos.

    Si L no es múltiplo de ΔZ, el último intervalo se acorta para
    terminar exactamente en L.

    Args:
        length: Largo de la fibra (km).
        step: Paso ΔZ (km).

    Returns:
        Grid: Grilla con N_z + 1 puntos.

    Raises:
        ScenarioError: Si length o step no son positivos o step > length.

    Examples:
        >>> build_grid(100, 30).points.tolist()
        [0.0, 30.0, 60.0, 90.0, 100.0]
    """
    if not (length > 0 and step > 0):
        raise ScenarioError(f"length ({length}) y step ({step}) deben ser positivos", field="link")
    if step > length:
        raise ScenarioError(f"step ({step}) no puede superar length ({length})", field="link.step_km")

    # Tolerancia para cocientes como 100/0.1 = 1000.0000000000001
    n_steps = max(1, math.ceil(length / step - 1e-9))
    points = np.append(np.arange(n_steps, dtype=float) * step, float(length))
    points.setflags(write=False)
    return Grid(points=points, step=float(step))


def build_coupling_matrix(scenario: LinkScenario) -> np.ndarray:
    """
    Construye la matriz de acople Raman G (N_ch × N_ch, 1/(W·km)).

    G[i][j] > 0 cuando el canal i gana potencia del canal j de mayor
    frecuencia; G[i][j] < 0 cuando i la cede a un canal de menor
    frecuencia (escalada por f_i/f_j si frequency_scaling está activo).

    Args:
        scenario: Escenario válido.

    Returns:
        np.ndarray: Matriz G con diagonal nula.
    """
    f = scenario.frequencies
    # df[i, j] = f_j - f_i
    df = f[np.newaxis, :] - f[:, np.newaxis]
    g = scenario.gain_model.gain(df)

    if scenario.gain_model.frequency_scaling:
        ratio = f[:, np.newaxis] / f[np.newaxis, :]
    else:
        ratio = np.ones_like(df)

    G = np.where(df > 0, g, -ratio * g)
    np.fill_diagonal(G, 0.0)
    return G


# =============================================================================
# PERFILES DE POTENCIA DE SEÑAL
# =============================================================================

@dataclass(frozen=True)
class TiltProfile:
    """
    Perfil de potencia no uniforme: inclinación lineal en dB.

    Attributes:
        mean_dbm: Potencia media por canal (dBm).
        tilt_db: Diferencia extremo a extremo (dB), positiva si crece con la frecuencia.
    """
    mean_dbm: float = 0.0
    tilt_db: float = 3.0

    def powers_dbm(self, frequencies: np.ndarray, k: float = 1.0) -> np.ndarray:
        """Potencias por canal, con la inclinación escalada por k."""
        f = np.asarray(frequencies, dtype=float)
        span = f.max() - f.min()
        x = (f - f.min()) / span if span > 0 else np.full_like(f, 0.5)
        return self.mean_dbm + k * self.tilt_db * (x - 0.5)


NON_UNIFORM_PROFILE = TiltProfile(mean_dbm=0.0, tilt_db=3.0)
"""Perfil no uniforme por defecto para las comparaciones."""

SignalPowerSpec = float | Sequence[float] | TiltProfile


def signal_powers_w(spec: SignalPowerSpec, frequencies: np.ndarray, tilt_k: float = 1.0) -> np.ndarray:
    """
    Resuelve una especificación de potencia de señal a watts por canal.

    Args:
        spec: Escalar dBm uniforme, lista de dBm por canal o TiltProfile.
        frequencies: Frecuencias de las señales (THz).
        tilt_k: Escala de la inclinación (solo para TiltProfile).

    Returns:
        np.ndarray: Potencias en W.
    """
    n = len(frequencies)
    if isinstance(spec, TiltProfile):
        return from_dbm(spec.powers_dbm(frequencies, tilt_k))
    if isinstance(spec, (int, float, np.number)):
        return np.full(n, dbm_to_watt(float(spec)))
    values = np.asarray(spec, dtype=float)
    if values.shape != (n,):
        raise ScenarioError(f"se esperaban {n} potencias de señal, llegaron {values.size}", field="signals.power_dbm")
    return from_dbm(values)


def band_frequencies(start_thz: float, count: int, spacing_ghz: float = CHANNEL_SPACING_GHZ) -> np.ndarray:
    """Peine de `count` canales desde `start_thz` con separación `spacing_ghz`."""
    if count < 1 or spacing_ghz <= 0:
        raise ScenarioError("count ≥ 1 y spacing_ghz > 0 requeridos", field="signals")
    return np.round(start_thz + np.arange(count) * spacing_ghz / 1000.0, 9)


def make_link(
    signal_frequencies: Sequence[float],
    signal_powers: Sequence[float],
    pump_frequencies: Sequence[float],
    pump_powers: Sequence[float],
    *,
    length: float = DEFAULT_LENGTH_KM,
    step: float = DEFAULT_STEP_KM,
    gain_model: RamanGainModel | None = None,
    attenuation_db_km: float | Sequence[float] = DEFAULT_ATTENUATION_DB_KM,
    label: str = "",
) -> LinkScenario:
    """
    Ensambla un LinkScenario a partir de señales y bombas.

    Los canales se ordenan por frecuencia. Una atenuación en lista se
    interpreta en ese orden final (N_ch valores).

    Args:
        signal_frequencies: Frecuencias de señal (THz).
        signal_powers: Potencias de señal en z=0 (W).
        pump_frequencies: Frecuencias de bomba (THz).
        pump_powers: Potencias de bomba en z=L (W).
        length: Largo (km).
        step: Paso ΔZ (km).
        gain_model: Espectro Raman; triangular por defecto.
        attenuation_db_km: Escalar o lista por canal (dB/km).
        label: Identificador para reportes.

    Returns:
        LinkScenario: Escenario validado.
    """
    if len(signal_frequencies) != len(signal_powers):
        raise ScenarioError("frecuencias y potencias de señal difieren en largo", field="signals")
    if len(pump_frequencies) != len(pump_powers):
        raise ScenarioError("frecuencias y potencias de bomba difieren en largo", field="pumps")

    entries = [(float(f), Direction.FORWARD, float(p)) for f, p in zip(signal_frequencies, signal_powers)]
    entries += [(float(f), Direction.BACKWARD, float(p)) for f, p in zip(pump_frequencies, pump_powers)]
    entries.sort(key=lambda e: e[0])

    alphas = np.atleast_1d(db_per_km_to_linear(attenuation_db_km))
    if alphas.size == 1:
        alphas = np.full(len(entries), alphas[0])
    elif alphas.size != len(entries):
        raise ScenarioError(
            f"se esperaban {len(entries)} atenuaciones, llegaron {alphas.size}",
            field="attenuation.db_per_km",
        )

    channels = tuple(
        ChannelSpec(center_frequency=f, direction=d, attenuation=float(a), boundary_power=p)
        for (f, d, p), a in zip(entries, alphas)
    )
    return LinkScenario(
        channels=channels,
        length=float(length),
        step=float(step),
        gain_model=gain_model if gain_model is not None else triangular_gain_model(),
        label=label,
    )


def _reference_pumps(adjustment: float) -> np.ndarray:
    if not adjustment > 0:
        raise ScenarioError(f"adjustment debe ser positivo ({adjustment})", field="pumps.adjustment")
    return np.asarray(REFERENCE_PUMP_POWERS_MW) / 1000.0 / adjustment


def make_cl_scenario(
    signal_power_dbm: SignalPowerSpec = 0.0,
    adjustment: float = 1.0,
    *,
    tilt_k: float = 1.0,
    length: float = DEFAULT_LENGTH_KM,
    step: float = DEFAULT_STEP_KM,
    gain_model: RamanGainModel | None = None,
    attenuation_db_km: float | Sequence[float] = DEFAULT_ATTENUATION_DB_KM,
) -> LinkScenario:
    """
    Sistema C+L de prueba: 76 señales a 125 GHz y 5 bombas contra-propagantes.

    El factor de ajuste divide las potencias originales de las bombas:
    un ajuste bajo significa bombas más potentes.

    Args:
        signal_power_dbm: dBm uniforme, lista por canal o TiltProfile.
        adjustment: Divisor de las potencias de bomba (> 0).
        tilt_k: Escala del perfil inclinado.
        length: Largo (km).
        step: Paso ΔZ (km).
        gain_model: Espectro Raman.
        attenuation_db_km: Atenuación escalar o por canal.

    Returns:
        LinkScenario: 81 canales.
    """
    pumps = _reference_pumps(adjustment)
    freqs = band_frequencies(CL_START_THZ, 2 * BAND_CHANNELS)
    return make_link(
        freqs,
        signal_powers_w(signal_power_dbm, freqs, tilt_k),
        CL_PUMP_FREQUENCIES_THZ,
        pumps,
        length=length,
        step=step,
        gain_model=gain_model,
        attenuation_db_km=attenuation_db_km,
        label=f"C+L adj={adjustment:g} k={tilt_k:g}",
    )


def make_cls_scenario(
    signal_power: SignalPowerSpec = NON_UNIFORM_PROFILE,
    adjustment: float = 1.0,
    tilt_k: float = 1.0,
    *,
    length: float = DEFAULT_LENGTH_KM,
    step: float = DEFAULT_STEP_KM,
    gain_model: RamanGainModel | None = None,
    attenuation_db_km: float | Sequence[float] = DEFAULT_ATTENUATION_DB_KM,
) -> LinkScenario:
    """
    Sistema C+L+S: el peine C+L más 38 canales S desde 196 THz, con las
    bombas corridas 5 THz hacia arriba.

    Returns:
        LinkScenario: 119 canales (114 señales + 5 bombas).
    """
    pumps = _reference_pumps(adjustment)
    freqs = np.concatenate([
        band_frequencies(CL_START_THZ, 2 * BAND_CHANNELS),
        band_frequencies(S_START_THZ, BAND_CHANNELS),
    ])
    return make_link(
        freqs,
        signal_powers_w(signal_power, freqs, tilt_k),
        CLS_PUMP_FREQUENCIES_THZ,
        pumps,
        length=length,
        step=step,
        gain_model=gain_model,
        attenuation_db_km=attenuation_db_km,
        label=f"C+L+S adj={adjustment:g} k={tilt_k:g}",
    )
