"""
Configuración centralizada del proyecto Raman Profile.

Este módulo contiene constantes físicas por defecto, paths y la
configuración de logging compartida por todos los módulos del proyecto.

Uso:
    from config import DEFAULT_LENGTH_KM, setup_logging
"""
import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path


# =============================================================================
# PATHS
# =============================================================================

OUTPUT_DIR = Path("./data/results")
"""Directorio por defecto para perfiles, reportes y tablas CSV."""

LOGS_DIR = Path("./logs")
"""Directorio para archivos de log."""


# =============================================================================
# VALORES POR DEFECTO DEL ENLACE
# =============================================================================

DEFAULT_LENGTH_KM = 100.0
"""Largo del tramo de fibra (km)."""

DEFAULT_STEP_KM = 0.1
"""Paso espacial ΔZ (km). 1001 puntos para el tramo por defecto."""

DEFAULT_ATTENUATION_DB_KM = 0.2
"""Atenuación plana típica de fibra SMF (dB/km)."""

RAMAN_PEAK_GAIN = 0.1
"""Pico de la aproximación triangular de ganancia Raman (1/(W·km))."""

RAMAN_PEAK_SHIFT_THZ = 13.2
"""Corrimiento de frecuencia donde la ganancia alcanza el pico (THz)."""

RAMAN_CUTOFF_THZ = 15.0
"""Corrimiento a partir del cual la ganancia es nula (THz)."""

CHANNEL_SPACING_GHZ = 125.0
"""Separación entre canales de señal (GHz)."""


# =============================================================================
# VALORES POR DEFECTO DEL SOLVER
# =============================================================================

DEFAULT_TOL_W = 1e-5
"""Tolerancia sobre el error de borde de las bombas (W)."""

DEFAULT_MAX_ITERATIONS = 3000
"""Número de corte: la mayoría de los sistemas convergen antes."""

DEFAULT_FACTORS_PUMP = (1.0, 5.0, 10.0, 15.0)
"""Escalera de divisores de bombas probada ante divergencia."""

RK4_SUBSTEPS = 4
"""Subpasos RK4 por intervalo de la grilla (inicializador y oráculo)."""

SHOOTING_DAMPING = 0.5
"""Amortiguamiento λ de la actualización multiplicativa del oráculo."""

SHOOTING_MAX_OUTER = 200
"""Iteraciones externas máximas del método de disparo."""

SHOOTING_BACKOFF = 0.5
"""Factor que reduce la estimación de bombas cuando la integración del oráculo desborda."""

SHOOTING_MAX_BACKOFFS = 20
"""Reducciones consecutivas permitidas antes de dar el disparo por fallido."""


# =============================================================================
# CONFIGURACIÓN DE LOGGING
# =============================================================================

LOG_MAX_BYTES = 5 * 1024 * 1024  # 5MB
"""Tamaño máximo de cada archivo de log antes de rotar."""

LOG_BACKUP_COUNT = 3
"""Número de archivos de backup a mantener (total ~20MB máximo)."""

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
"""Formato de los mensajes de log."""

LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
"""Formato de fecha/hora en los logs."""


def setup_logging(
    name: str | None = None,
    log_to_file: bool = True,
    level: str = "INFO",
) -> logging.Logger:
    """
    Configura y retorna un logger con formato consistente.

    Crea un logger con handlers para consola y opcionalmente archivo.
    El handler de archivo usa RotatingFileHandler para evitar
    crecimiento ilimitado. Con name=None se configura el logger raíz,
    de modo que los loggers de raman.* heredan los handlers.

    Args:
        name: Nombre del logger (None para el raíz).
        log_to_file: Si True, también escribe logs a archivo con rotación.
        level: Nivel de logging (DEBUG, INFO, WARNING...).

    Returns:
        logging.Logger: Logger configurado y listo para usar.

    Example:
        >>> logger = setup_logging(log_to_file=False)
        >>> logger.info("Mensaje de prueba")
    """
    logger = logging.getLogger(name)

    # Evitar configurar múltiples veces
    if logger.handlers:
        return logger

    logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    # Handler para consola
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    logger.addHandler(console_handler)

    # Handler para archivo con rotación
    if log_to_file:
        try:
            LOGS_DIR.mkdir(parents=True, exist_ok=True)
            log_file = LOGS_DIR / "raman_profile.log"
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=LOG_MAX_BYTES,
                backupCount=LOG_BACKUP_COUNT,
                encoding="utf-8"
            )
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
            logger.addHandler(file_handler)
        except Exception as e:
            logger.warning(f"No se pudo configurar logging a archivo: {e}")

    return logger


def env_int(name: str, default: int) -> int:
    """
    Lee un entero del entorno, usando el default si es inválido.

    Args:
        name: Nombre de la variable de entorno.
        default: Valor a usar si falta o no es un entero.

    Returns:
        int: Valor leído o default.
    """
    raw = os.getenv(name, str(default)).strip()
    try:
        return int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"{name} inválido ({raw}), usando {default} por defecto.")
        return default
