"""
Lectura de archivos de escenario (JSON).

Formato:
    {
      "label": "C+L uniforme",                      (opcional)
      "link": {"length_km": 100, "step_km": 0.1},
      "signals": {
        "start_thz": 186.0, "count": 76, "spacing_ghz": 125,
        "power_dbm": 0                               (escalar, lista o
                                                      {"mean_dbm", "tilt_db", "k"})
      },
      "pumps": {"frequency_thz": [...], "power_mw": [...], "adjustment": 1},
      "raman": "triangular",                         (o {"preset", "peak_gain",
                                                      "peak_shift_thz", "cutoff_thz",
                                                      "frequency_scaling"} o
                                                      {"shift_thz", "gain"})
      "attenuation": {"db_per_km": 0.2}              (escalar o lista por canal)
    }

En "signals" también se acepta "frequency_thz" con la lista explícita o
"bands" con varios generadores {start_thz, count, spacing_ghz}.
Las secciones "pumps", "raman" y "attenuation" son opcionales.

Todos los errores se reportan como ScenarioError con el campo (y la
línea, para errores de sintaxis).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from config import (
    CHANNEL_SPACING_GHZ,
    DEFAULT_ATTENUATION_DB_KM,
    RAMAN_CUTOFF_THZ,
    RAMAN_PEAK_GAIN,
    RAMAN_PEAK_SHIFT_THZ,
)
from .common import ScenarioError
from .link import (
    BAND_CHANNELS,
    CL_PUMP_FREQUENCIES_THZ,
    CL_START_THZ,
    REFERENCE_PUMP_POWERS_MW,
    LinkScenario,
    RamanGainModel,
    SignalPowerSpec,
    TiltProfile,
    band_frequencies,
    make_link,
    signal_powers_w,
    triangular_gain_model,
)

logger = logging.getLogger(__name__)

_MISSING = object()


# =============================================================================
# PLANTILLA
# =============================================================================

@dataclass(frozen=True)
class ScenarioTemplate:
    """
    Escenario leído de archivo, antes de aplicar overrides.

    Las potencias de bomba se guardan sin dividir por el ajuste para que
    un barrido pueda variar el ajuste sin releer el archivo.
    """
    length_km: float
    step_km: float
    signal_frequencies: tuple[float, ...]
    signal_power: SignalPowerSpec
    pump_frequencies: tuple[float, ...]
    pump_powers_mw: tuple[float, ...]
    adjustment: float
    gain_model: RamanGainModel
    attenuation_db_km: float | tuple[float, ...]
    tilt_k: float = 1.0
    label: str = ""

    def build(
        self,
        signal_dbm: float | None = None,
        adjustment: float | None = None,
        tilt_k: float | None = None,
        step_km: float | None = None,
    ) -> LinkScenario:
        """
        Arma el LinkScenario aplicando overrides.

        Con un perfil inclinado, signal_dbm reemplaza la potencia media y
        conserva la inclinación; en otro caso impone potencia uniforme.

        Raises:
            ScenarioError: Si el escenario resultante es inválido.
        """
        adjustment = self.adjustment if adjustment is None else adjustment
        tilt_k = self.tilt_k if tilt_k is None else tilt_k
        if not adjustment > 0:
            raise ScenarioError(f"debe ser positivo ({adjustment})", field="pumps.adjustment")

        power: SignalPowerSpec = self.signal_power
        if signal_dbm is not None:
            power = replace(power, mean_dbm=signal_dbm) if isinstance(power, TiltProfile) else float(signal_dbm)

        label = f"{self.label or 'escenario'} P={_describe_power(power)} adj={adjustment:g}"
        if isinstance(power, TiltProfile):
            label += f" k={tilt_k:g}"

        return make_link(
            self.signal_frequencies,
            signal_powers_w(power, self.signal_frequencies, tilt_k),
            self.pump_frequencies,
            [p / 1000.0 / adjustment for p in self.pump_powers_mw],
            length=self.length_km,
            step=self.step_km if step_km is None else step_km,
            gain_model=self.gain_model,
            attenuation_db_km=self.attenuation_db_km,
            label=label,
        )


def _describe_power(power: SignalPowerSpec) -> str:
    if isinstance(power, TiltProfile):
        return f"{power.mean_dbm:g}dBm±{power.tilt_db / 2:g}"
    if isinstance(power, (int, float)):
        return f"{power:g}dBm"
    return "lista"


# =============================================================================
# VALIDACIÓN DE CAMPOS
# =============================================================================

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _section(data: dict, name: str, required: bool = True) -> Any:
    if name not in data:
        if required:
            raise ScenarioError("sección requerida ausente", field=name)
        return None
    return data[name]


def _number(section: dict, key: str, path: str, default: Any = _MISSING) -> float:
    if key not in section:
        if default is _MISSING:
            raise ScenarioError("campo requerido ausente", field=f"{path}.{key}")
        return default
    value = section[key]
    if not _is_number(value):
        raise ScenarioError(f"se esperaba un número, llegó {value!r}", field=f"{path}.{key}")
    return float(value)


def _number_list(section: dict, key: str, path: str) -> tuple[float, ...]:
    if key not in section:
        raise ScenarioError("campo requerido ausente", field=f"{path}.{key}")
    values = section[key]
    if not isinstance(values, list) or not all(_is_number(v) for v in values):
        raise ScenarioError("se esperaba una lista de números", field=f"{path}.{key}")
    return tuple(float(v) for v in values)


def _require_dict(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError("se esperaba un objeto", field=path)
    return value


# =============================================================================
# SECCIONES
# =============================================================================

def _parse_band(section: dict, path: str) -> tuple[float, ...]:
    start = _number(section, "start_thz", path)
    count = _number(section, "count", path)
    if count != int(count) or count < 1:
        raise ScenarioError(f"debe ser un entero ≥ 1 ({count:g})", field=f"{path}.count")
    spacing = _number(section, "spacing_ghz", path, CHANNEL_SPACING_GHZ)
    return tuple(band_frequencies(start, int(count), spacing).tolist())


def _parse_signals(section: dict) -> tuple[tuple[float, ...], SignalPowerSpec, float]:
    if "frequency_thz" in section:
        freqs = _number_list(section, "frequency_thz", "signals")
        if not freqs:
            raise ScenarioError("se requiere al menos una señal", field="signals.frequency_thz")
    elif "bands" in section:
        bands = section["bands"]
        if not isinstance(bands, list) or not bands:
            raise ScenarioError("se esperaba una lista de bandas", field="signals.bands")
        freqs = tuple(
            f for i, band in enumerate(bands)
            for f in _parse_band(_require_dict(band, f"signals.bands[{i}]"), f"signals.bands[{i}]")
        )
    else:
        freqs = _parse_band(section, "signals")

    raw = section.get("power_dbm", 0.0)
    tilt_k = 1.0
    if _is_number(raw):
        power: SignalPowerSpec = float(raw)
    elif isinstance(raw, list):
        power = _number_list(section, "power_dbm", "signals")
        if len(power) != len(freqs):
            raise ScenarioError(f"se esperaban {len(freqs)} valores, llegaron {len(power)}", field="signals.power_dbm")
    elif isinstance(raw, dict):
        path = "signals.power_dbm"
        power = TiltProfile(
            mean_dbm=_number(raw, "mean_dbm", path, 0.0),
            tilt_db=_number(raw, "tilt_db", path, 3.0),
        )
        tilt_k = _number(raw, "k", path, 1.0)
    else:
        raise ScenarioError("se esperaba escalar, lista u objeto de inclinación", field="signals.power_dbm")
    return freqs, power, tilt_k


def _parse_pumps(section: dict | None) -> tuple[tuple[float, ...], tuple[float, ...], float]:
    if section is None:
        return (), (), 1.0
    section = _require_dict(section, "pumps")
    freqs = _number_list(section, "frequency_thz", "pumps")
    powers = _number_list(section, "power_mw", "pumps")
    if len(freqs) != len(powers):
        raise ScenarioError(f"{len(freqs)} frecuencias y {len(powers)} potencias", field="pumps.power_mw")
    if any(p <= 0 for p in powers):
        raise ScenarioError("las potencias deben ser positivas", field="pumps.power_mw")
    adjustment = _number(section, "adjustment", "pumps", 1.0)
    if not adjustment > 0:
        raise ScenarioError(f"debe ser positivo ({adjustment:g})", field="pumps.adjustment")
    return freqs, powers, adjustment


def _parse_raman(section: Any) -> RamanGainModel:
    if section is None or section == "triangular":
        return triangular_gain_model()
    if isinstance(section, str):
        raise ScenarioError(f"preset desconocido: {section!r}", field="raman")
    section = _require_dict(section, "raman")

    scaling = section.get("frequency_scaling", True)
    if not isinstance(scaling, bool):
        raise ScenarioError("se esperaba true/false", field="raman.frequency_scaling")

    if "shift_thz" in section or "gain" in section:
        return RamanGainModel(
            _number_list(section, "shift_thz", "raman"),
            _number_list(section, "gain", "raman"),
            frequency_scaling=scaling,
        )

    preset = section.get("preset", "triangular")
    if preset != "triangular":
        raise ScenarioError(f"preset desconocido: {preset!r}", field="raman.preset")
    return triangular_gain_model(
        peak=_number(section, "peak_gain", "raman", RAMAN_PEAK_GAIN),
        peak_shift=_number(section, "peak_shift_thz", "raman", RAMAN_PEAK_SHIFT_THZ),
        cutoff=_number(section, "cutoff_thz", "raman", RAMAN_CUTOFF_THZ),
        frequency_scaling=scaling,
    )


def _parse_attenuation(section: Any) -> float | tuple[float, ...]:
    if section is None:
        return DEFAULT_ATTENUATION_DB_KM
    section = _require_dict(section, "attenuation")
    value = section.get("db_per_km", DEFAULT_ATTENUATION_DB_KM)
    if _is_number(value):
        if value < 0:
            raise ScenarioError("no puede ser negativa", field="attenuation.db_per_km")
        return float(value)
    values = _number_list(section, "db_per_km", "attenuation")
    if any(v < 0 for v in values):
        raise ScenarioError("no puede ser negativa", field="attenuation.db_per_km")
    return values


# =============================================================================
# API PÚBLICA
# =============================================================================

def parse_template(data: Any, label: str = "") -> ScenarioTemplate:
    """
    Valida un documento de escenario ya decodificado.

    Args:
        data: Objeto JSON decodificado.
        label: Etiqueta si el documento no trae una.

    Returns:
        ScenarioTemplate: Plantilla validada.

    Raises:
        ScenarioError: Ante cualquier campo ausente o inválido.
    """
    data = _require_dict(data, "scenario")

    link = _require_dict(_section(data, "link"), "link")
    length = _number(link, "length_km", "link")
    step = _number(link, "step_km", "link")
    if not (length > 0 and 0 < step <= length):
        raise ScenarioError(f"se requiere 0 < step_km ≤ length_km ({step:g}, {length:g})", field="link.step_km")

    signal_freqs, signal_power, tilt_k = _parse_signals(_require_dict(_section(data, "signals"), "signals"))
    pump_freqs, pump_powers, adjustment = _parse_pumps(_section(data, "pumps", required=False))

    return ScenarioTemplate(
        length_km=length,
        step_km=step,
        signal_frequencies=signal_freqs,
        signal_power=signal_power,
        pump_frequencies=pump_freqs,
        pump_powers_mw=pump_powers,
        adjustment=adjustment,
        gain_model=_parse_raman(_section(data, "raman", required=False)),
        attenuation_db_km=_parse_attenuation(_section(data, "attenuation", required=False)),
        tilt_k=tilt_k,
        label=str(data.get("label", label)),
    )


def load_template(path: str | Path) -> ScenarioTemplate:
    """
    Lee y valida un archivo de escenario.

    Raises:
        ScenarioError: Archivo ilegible, JSON mal formado (con línea) o
            campos inválidos.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"no se pudo leer {path}: {e}", field="scenario") from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"JSON inválido: {e.msg}", field="scenario", line=e.lineno) from e

    template = parse_template(data, label=path.stem)
    logger.info(f"Escenario cargado: {path} ({len(template.signal_frequencies)} señales, "
                f"{len(template.pump_frequencies)} bombas)")
    return template


def load_scenario(path: str | Path, **overrides) -> LinkScenario:
    """Atajo: lee el archivo y arma el escenario con los overrides dados."""
    return load_template(path).build(**overrides)


def cl_document(
    power_dbm: float | list[float] | dict = 0.0,
    adjustment: float = 1.0,
    length_km: float = 100.0,
    step_km: float = 0.1,
    label: str = "C+L",
) -> dict:
    """
    Documento de escenario del sistema C+L de prueba (76 señales, 5 bombas).

    Útil para generar archivos de ejemplo y en los tests.
    """
    return {
        "label": label,
        "link": {"length_km": length_km, "step_km": step_km},
        "signals": {
            "start_thz": CL_START_THZ,
            "count": 2 * BAND_CHANNELS,
            "spacing_ghz": CHANNEL_SPACING_GHZ,
            "power_dbm": power_dbm,
        },
        "pumps": {
            "frequency_thz": list(CL_PUMP_FREQUENCIES_THZ),
            "power_mw": list(REFERENCE_PUMP_POWERS_MW),
            "adjustment": adjustment,
        },
        "raman": "triangular",
        "attenuation": {"db_per_km": DEFAULT_ATTENUATION_DB_KM},
    }
