"""
Orquestador principal del solver de perfiles de potencia Raman.

Este módulo es el punto de entrada de línea de comandos. Carga la
configuración del entorno, resuelve los parámetros del solver y
despacha a los trabajos de bench.py.

Subcomandos:
    solve         Resuelve un escenario y guarda perfil, reporte y traza
    sweep         Barre potencias de señal × ajustes de bombas (grilla Div/Osc)
    compare       Compara el método híbrido con el oráculo de disparo
    compare-grid  Comparación en una grilla potencia (o k) × ajuste
    ch-cl         Repite la grilla de estrés para cada par (CH, CL)

Uso:
    python main.py solve --scenario scenarios/cl_uniform.json
    python main.py sweep --scenario scenarios/cl_uniform.json --powers=-5,0,5 --adjustments 1,0.7,0.1
    python main.py compare --scenario scenarios/cl_tilt.json --repetitions 3
    python main.py compare-grid --scenario scenarios/cl_tilt.json --tilt-ks 0,1 --adjustments 1,0.7,0.4
    python main.py ch-cl --scenario scenarios/cl_uniform.json --chs 1,3,5 --cls 0.1,0.05

Variables de entorno (.env):
    RAMAN_OUTPUT_DIR   Directorio de salida por defecto (./data/results)
    RAMAN_WORKERS      Procesos para los barridos (1)
    RAMAN_LOG_TO_FILE  Guardar logs en ./logs (1)
    RAMAN_LOG_LEVEL    Nivel de logging (INFO)
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

import bench
from config import OUTPUT_DIR, env_int, setup_logging
from raman.common import ScenarioError
from raman.state import SolverParams

logger = logging.getLogger(__name__)


DEFAULT_SWEEP_POWERS = tuple(float(p) for p in range(-10, 11))
"""Potencias de señal por defecto del barrido: -10 a +10 dBm cada 1 dB."""

DEFAULT_SWEEP_ADJUSTMENTS = tuple(round(1.0 - 0.1 * i, 1) for i in range(10))
"""Ajustes por defecto del barrido: 1 a 0.1 cada 0.1."""

DEFAULT_COMPARE_POWERS = (-5.0, 0.0, 5.0, 10.0)
"""Potencias de la comparación en grilla (el oráculo es caro)."""

DEFAULT_COMPARE_ADJUSTMENTS = (1.0, 0.7, 0.4)
"""Ajustes de la comparación en grilla."""

DEFAULT_STUDY_CHS = (1.0, 3.0, 5.0)
"""Valores de CH del estudio de factores de corrección."""

DEFAULT_STUDY_CLS = (0.1, 0.05)
"""Valores de CL del estudio de factores de corrección."""


# =============================================================================
# TIPOS DE DATOS
# =============================================================================

@dataclass(frozen=True)
class RunConfig:
    """
    Configuración de ejecución tomada del entorno.

    Attributes:
        output_dir: Directorio de salida por defecto.
        workers: Procesos para los barridos.
        log_to_file: Si True, los logs también van a ./logs.
        log_level: Nivel de logging.
    """
    output_dir: Path
    workers: int = 1
    log_to_file: bool = True
    log_level: str = "INFO"


# =============================================================================
# CARGA DE CONFIGURACIÓN
# =============================================================================

def load_config() -> RunConfig:
    """
    Carga la configuración desde variables de entorno y archivo .env.

    Returns:
        RunConfig: Objeto con toda la configuración.
    """
    load_dotenv()

    output_dir = Path(os.getenv("RAMAN_OUTPUT_DIR", str(OUTPUT_DIR)).strip() or OUTPUT_DIR)
    workers = env_int("RAMAN_WORKERS", 1)
    if workers < 1:
        logger.warning(f"RAMAN_WORKERS inválido ({workers}), usando 1")
        workers = 1

    return RunConfig(
        output_dir=output_dir,
        workers=workers,
        log_to_file=os.getenv("RAMAN_LOG_TO_FILE", "1").strip() == "1",
        log_level=os.getenv("RAMAN_LOG_LEVEL", "INFO").strip() or "INFO",
    )


# =============================================================================
# ARGUMENTOS
# =============================================================================

def float_list(text: str) -> tuple[float, ...]:
    """
    Convierte "a,b,c" en una tupla de floats.

    Examples:
        >>> float_list("1,5,10")
        (1.0, 5.0, 10.0)
    """
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de números inválida: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("la lista no puede estar vacía")
    return values


def build_parser() -> argparse.ArgumentParser:
    """Construye el parser con los cinco subcomandos."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, required=True, help="archivo de escenario JSON")
    common.add_argument("--out", type=Path, default=None, help="directorio de salida")
    common.add_argument("--ch", type=float, help="factor de corrección ante sobre-cálculo")
    common.add_argument("--cl", type=float, help="factor de corrección inicial ante sub-cálculo")
    common.add_argument("--tol", type=float, help="tolerancia de borde de bombas (W)")
    common.add_argument("--max-iter", type=int, help="número de corte de iteraciones")
    common.add_argument("--step-km", type=float, help="paso espacial ΔZ (km)")
    common.add_argument("--adjustment", type=float, help="divisor de las potencias de bomba")
    common.add_argument("--signal-dbm", type=float, help="potencia de señal uniforme (dBm)")
    common.add_argument("--factors-pump", type=float_list, help="escalera de factores, ej: 1,5,10,15")

    parser = argparse.ArgumentParser(description="Perfil de potencia en enlaces con amplificación Raman")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="resolver un escenario")
    solve.add_argument("--trace", action="store_true", help="guardar la traza por iteración")

    sweep = sub.add_parser("sweep", parents=[common], help="barrido potencia × ajuste")
    sweep.add_argument("--powers", type=float_list, default=DEFAULT_SWEEP_POWERS, help="potencias de señal (dBm)")
    sweep.add_argument("--adjustments", type=float_list, default=DEFAULT_SWEEP_ADJUSTMENTS, help="ajustes de bombas")
    sweep.add_argument("--tilt-ks", type=float_list, default=(), help="escalas de inclinación")
    sweep.add_argument("--repetitions", type=int, default=1, help="corridas por celda")
    sweep.add_argument("--workers", type=int, default=None, help="procesos en paralelo")

    compare = sub.add_parser("compare", parents=[common], help="comparar con el oráculo")
    compare.add_argument("--repetitions", type=int, default=3, help="corridas a promediar")

    grid = sub.add_parser("compare-grid", parents=[common], help="comparación en grilla")
    grid.add_argument("--powers", type=float_list, default=DEFAULT_COMPARE_POWERS, help="potencias de señal (dBm)")
    grid.add_argument("--adjustments", type=float_list, default=DEFAULT_COMPARE_ADJUSTMENTS, help="ajustes de bombas")
    grid.add_argument("--tilt-ks", type=float_list, default=(), help="escalas de inclinación")
    grid.add_argument("--repetitions", type=int, default=3, help="corridas a promediar por celda")
    grid.add_argument("--workers", type=int, default=None, help="procesos en paralelo")

    study = sub.add_parser("ch-cl", parents=[common], help="estudio de los factores CH y CL")
    study.add_argument("--chs", type=float_list, default=DEFAULT_STUDY_CHS, help="valores de CH")
    study.add_argument("--cls", type=float_list, default=DEFAULT_STUDY_CLS, help="valores de CL")
    study.add_argument("--powers", type=float_list, default=DEFAULT_SWEEP_POWERS, help="potencias de señal (dBm)")
    study.add_argument("--adjustments", type=float_list, default=DEFAULT_SWEEP_ADJUSTMENTS, help="ajustes de bombas")
    study.add_argument("--tilt-ks", type=float_list, default=(), help="escalas de inclinación")
    study.add_argument("--workers", type=int, default=None, help="procesos en paralelo")

    return parser


# =============================================================================
# PUNTO DE ENTRADA
# =============================================================================

def main(argv: list[str] | None = None) -> int:
    """
    Punto de entrada principal del CLI.

    Returns:
        int: Código de salida (ver bench.py).
    """
    args = build_parser().parse_args(argv)
    cfg = load_config()
    setup_logging(log_to_file=cfg.log_to_file, level=cfg.log_level)

    out_dir = args.out or cfg.output_dir
    try:
        params = SolverParams().with_overrides(
            ch=args.ch,
            cl_initial=args.cl,
            tol=args.tol,
            max_iterations=args.max_iter,
            factors_pump=args.factors_pump,
        )
    except ScenarioError as e:
        logger.error(f"Parámetros inválidos: {e}")
        return bench.EXIT_INPUT_ERROR

    overrides = bench.ScenarioOverrides(
        signal_dbm=args.signal_dbm,
        adjustment=args.adjustment,
        step_km=args.step_km,
    )

    if args.command == "solve":
        code = bench.cli_solve(args.scenario, params, out_dir, overrides, write_trace=args.trace)
    elif args.command == "compare":
        code = bench.cli_compare(args.scenario, params, out_dir, args.repetitions, overrides)
    else:
        try:
            spec = bench.SweepSpec(
                signal_powers_dbm=args.powers,
                adjustments=args.adjustments,
                tilt_ks=args.tilt_ks,
                repetitions=getattr(args, "repetitions", 1),
            )
        except ScenarioError as e:
            logger.error(f"Grilla inválida: {e}")
            return bench.EXIT_INPUT_ERROR
        workers = max(1, args.workers if args.workers is not None else cfg.workers)

        if args.command == "sweep":
            code = bench.cli_sweep(args.scenario, spec, params, out_dir, step_km=args.step_km, workers=workers)
        elif args.command == "compare-grid":
            code = bench.cli_compare_grid(args.scenario, spec, params, out_dir, step_km=args.step_km, workers=workers)
        else:
            code = bench.cli_correction_study(
                args.scenario, spec, args.chs, args.cls, params, out_dir, step_km=args.step_km, workers=workers
            )

    logger.info(f"Proceso finalizado ({args.command}), código de salida {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
