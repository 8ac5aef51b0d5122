"""Fixtures compartidos: enlaces chicos que resuelven en milisegundos."""
from __future__ import annotations

import numpy as np
import pytest

from raman.common import dbm_to_watt
from raman.link import band_frequencies, make_link, zero_gain_model


def small_link(
    n_signals: int = 4,
    signal_dbm: float = 0.0,
    pump_mw: tuple[float, ...] = (300.0, 200.0),
    pump_thz: tuple[float, ...] = (203.0, 204.0),
    length: float = 50.0,
    step: float = 0.5,
    gain_model=None,
    attenuation_db_km: float = 0.2,
    label: str = "chico",
):
    """Enlace de prueba: señales desde 190 THz cada 250 GHz y bombas ~13 THz arriba."""
    freqs = band_frequencies(190.0, n_signals, 250.0)
    return make_link(
        freqs,
        np.full(n_signals, dbm_to_watt(signal_dbm)),
        pump_thz[:len(pump_mw)],
        [p / 1000.0 for p in pump_mw],
        length=length,
        step=step,
        gain_model=gain_model,
        attenuation_db_km=attenuation_db_km,
        label=label,
    )


@pytest.fixture
def link():
    return small_link()


@pytest.fixture
def signals_only_link():
    return small_link(pump_mw=(), length=20.0, step=0.5)


@pytest.fixture
def zero_gain_link():
    return small_link(gain_model=zero_gain_model())


@pytest.fixture(autouse=True)
def _no_file_logs(monkeypatch):
    monkeypatch.setenv("RAMAN_LOG_TO_FILE", "0")
