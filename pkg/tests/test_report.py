import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import report
from raman.state import SolverReport, Stage, Status, TraceRecord


def _report(status=Status.CONVERGED):
    return SolverReport(
        status=status,
        iterations=42,
        final_pump_error=np.array([2e-6, np.nan]),
        pump_factor_used=5.0,
        cl_history=[(100, 0.025)],
        wall_time=0.25,
        message="ok",
        trace=[TraceRecord(1, Stage.SIGNAL_SCALE_UP, (0.1, -0.2)), TraceRecord(2, Stage.DPC, (1e-6, 0.0))],
    )


def test_profile_csv_round_trip(tmp_path):
    z = np.linspace(0.0, 2.0, 5)
    freqs = np.array([186.0, 186.125, 210.56])
    profile = np.array([np.full(5, 1e-3), np.linspace(1e-4, 2e-4, 5), np.linspace(0.1, 0.36, 5)])

    path = report.write_profile_csv(tmp_path / "sub" / "perfil.csv", z, freqs, profile)
    z_back, f_back, p_back = report.read_profile_csv(path)

    assert path.read_text().splitlines()[0] == "z_km,186THz,186.125THz,210.56THz"
    assert_allclose(z_back, z)
    assert_allclose(f_back, freqs)
    assert_allclose(p_back, profile, rtol=1e-9)


def test_profile_is_written_in_dbm(tmp_path):
    path = report.write_profile_csv(tmp_path / "p.csv", np.array([0.0, 1.0]), np.array([190.0]), np.full((1, 2), 1e-3))
    rows = path.read_text().splitlines()[1:]
    assert [float(r.split(",")[1]) for r in rows] == pytest.approx([0.0, 0.0], abs=1e-12)


def test_report_json_serialises_nan_as_null(tmp_path):
    path = report.write_report(tmp_path / "r.json", _report(), "chico")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["status"] == "Converged"
    assert data["scenario"] == "chico"
    assert data["final_pump_error_w"] == [2e-6, None]
    assert data["cl_history"] == [{"iteration": 100, "cl": 0.025}]
    assert data["pump_factor_used"] == 5.0
    assert "updated_at" in data


def test_trace_csv(tmp_path):
    path = report.write_trace_csv(tmp_path / "t.csv", _report().trace, n_pumps=2)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["iteration", "stage", "pump_error_1_w", "pump_error_2_w"]
    assert rows[1][:2] == ["1", "SignalScaleUp"]
    assert float(rows[2][2]) == 1e-6


@pytest.mark.parametrize("status, iterations, cell", [
    (Status.CONVERGED, 117, "117"),
    (Status.DIVERGED, 4, "Div"),
    (Status.OSCILLATING, 3000, "Osc"),
    (Status.ITERATION_CAPPED, 3000, "Osc"),
])
def test_sweep_cell(status, iterations, cell):
    assert report.sweep_cell(status, iterations) == cell


def test_sweep_csv_layout(tmp_path):
    path = report.write_sweep_csv(
        tmp_path / "s.csv", [(-10.0, None), (0.0, None)], [1.0, 0.5], [["12", "Div"], ["15", "Osc"]]
    )
    assert path.read_text().splitlines() == [
        "signal_dbm,adj=1,adj=0.5",
        "-10,12,Div",
        "0,15,Osc",
    ]


def test_sweep_csv_with_tilt_column(tmp_path):
    path = report.write_sweep_csv(tmp_path / "s.csv", [(0.0, 1.0), (0.0, 2.0)], [1.0], [["9"], ["11"]])
    assert path.read_text().splitlines() == ["signal_dbm,tilt_k,adj=1", "0,1,9", "0,2,11"]


def test_comparison_csv_and_summary(tmp_path):
    row = {
        "scenario": "chico",
        "hybrid_status": "Converged",
        "hybrid_iterations": 50,
        "hybrid_seconds": 0.1,
        "oracle_converged": False,
        "oracle_seconds": 0.4,
        "max_db_error": report.INVALID_MARK,
        "time_gain": None,
    }
    csv_path = report.write_comparison_csv(tmp_path / "c.csv", [row])
    with open(csv_path, newline="", encoding="utf-8") as f:
        (parsed,) = list(csv.DictReader(f))
    assert list(parsed) == report.COMPARISON_FIELDS
    assert parsed["max_db_error"] == "invalid"
    assert parsed["time_gain"] == ""

    md = report.write_comparison_summary(tmp_path / "c.md", row, 3, [1e-2, 1e-4], "falló").read_text(encoding="utf-8")
    assert "# Comparación: chico" in md
    assert "Failed" in md
    assert "1.000e-04" in md


@pytest.mark.parametrize("value, decimals, text", [(None, 4, "--"), (0.12345, 2, "0.12"), (7, 4, "7"), ("invalid", 4, "invalid")])
def test_fmt(value, decimals, text):
    assert report.fmt(value, decimals) == text


def test_correction_study_csv_leaves_missing_mean_empty(tmp_path):
    rows = [
        {"ch": 3.0, "cl": 0.1, "cells": 4, "converged": 4, "mean_iterations": 57.5},
        {"ch": 5.0, "cl": 0.05, "cells": 4, "converged": 0, "mean_iterations": None},
    ]
    path = report.write_correction_study_csv(tmp_path / "ch_cl.csv", rows)

    with open(path, newline="", encoding="utf-8") as f:
        read = list(csv.DictReader(f))
    assert list(read[0]) == report.CORRECTION_STUDY_FIELDS
    assert read[0]["mean_iterations"] == "57.5"
    assert read[1]["converged"] == "0"
    assert read[1]["mean_iterations"] == ""


def test_grid_summary(tmp_path):
    path = report.write_grid_summary(tmp_path / "g.md", label="cl", cells=12, valid=10, mean_gain=31.456, repetitions=3)
    text = path.read_text(encoding="utf-8")
    assert "**Celdas válidas**: 10" in text
    assert "**Ganancia de tiempo media**: 31.46" in text
    assert "`cl_grid_errors.csv`" in text
