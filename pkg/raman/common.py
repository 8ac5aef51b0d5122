"""
Utilidades compartidas para los módulos del solver Raman.

Este módulo contiene funciones comunes utilizadas por todos los módulos
del paquete, incluyendo:
- Conversión de unidades (dBm ↔ W, dB/km ↔ 1/km)
- Manejo de timezone y timestamps para los reportes
- Excepciones del dominio

Todas las potencias internas están en watts; los dBm solo aparecen en
la entrada y salida de archivos.
"""
from __future__ import annotations

import math
import os
from datetime import datetime, timezone, timedelta
from zoneinfo import ZoneInfo

import numpy as np
from numpy.typing import ArrayLike


# =============================================================================
# EXCEPCIONES
# =============================================================================

class ScenarioError(ValueError):
    """
    Argumento o escenario inválido.

    Attributes:
        field: Campo (o ruta de campo) que causó el error, si se conoce.
        line: Línea del archivo de escenario, si se conoce.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"línea {line}: "
        if field:
            prefix += f"[{field}] "
        super().__init__(f"{prefix}{message}")


class DivergenceError(RuntimeError):
    """Aparecieron valores no finitos o no positivos durante la resolución."""


class IntegrationError(RuntimeError):
    """
    La integración RK4 produjo valores no finitos.

    Attributes:
        z_km: Posición (en la coordenada de integración) donde falló.
    """

    def __init__(self, message: str, z_km: float):
        self.z_km = z_km
        super().__init__(f"{message} (z = {z_km:.4f} km)")


class ComparisonError(ValueError):
    """Comparación de perfiles sobre entradas no positivas o no finitas."""


# =============================================================================
# CONVERSIÓN DE UNIDADES
# =============================================================================

NEPER_DB = 10.0 * math.log10(math.e)
"""Factor dB ↔ neper de potencia (≈ 4.343)."""


def dbm_to_watt(p_dbm: float) -> float:
    """
    Convierte potencia de dBm a watts.

    Examples:
        >>> dbm_to_watt(0.0)
        0.001
        >>> dbm_to_watt(30.0)
        1.0
    """
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_w: float) -> float:
    """
    Convierte potencia de watts a dBm.

    Raises:
        ValueError: Si la potencia no es positiva.
    """
    if not p_w > 0:
        raise ValueError(f"Potencia no positiva ({p_w} W) no tiene representación en dBm")
    return 10.0 * math.log10(p_w) + 30.0


def to_dbm(p_w: ArrayLike) -> np.ndarray:
    """Versión vectorizada de watt_to_dbm (sin validación)."""
    return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


def from_dbm(p_dbm: ArrayLike) -> np.ndarray:
    """Versión vectorizada de dbm_to_watt."""
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def db_per_km_to_linear(db_per_km: ArrayLike) -> np.ndarray | float:
    """
    Convierte atenuación de dB/km a unidades lineales 1/km.

    Example:
        >>> round(db_per_km_to_linear(0.2), 5)
        0.04605
    """
    value = np.asarray(db_per_km, dtype=float) / NEPER_DB
    return float(value) if value.ndim == 0 else value


def db_step_gain(step_db: float) -> float:
    """Factor lineal equivalente a subir step_db decibeles."""
    return 10.0 ** (step_db / 10.0)


# =============================================================================
# TIMESTAMPS
# =============================================================================

DEFAULT_TIMEZONE = "UTC"
"""Timezone por defecto si no se especifica TZ en el entorno."""


def get_timezone() -> timezone:
    """
    Obtiene el timezone configurado desde la variable de entorno TZ.

    Returns:
        timezone: Objeto timezone para usar con datetime; UTC si TZ no es válido.
    """
    tz_name = os.environ.get("TZ", DEFAULT_TIMEZONE)
    try:
        return ZoneInfo(tz_name)
    except Exception:
        return timezone(timedelta(0))


def now_iso() -> str:
    """
    Retorna la fecha/hora actual en formato ISO 8601 con timezone.

    Returns:
        str: Timestamp en formato ISO (ej: "2026-01-30T22:30:00+00:00")
    """
    return datetime.now(get_timezone()).isoformat(timespec="seconds")
