"""Synthetic stand-ins for the room-occupancy and GPS-tracker CSVs.

The real files are not bundled. These generators write CSVs with the same
column layout so every pipeline can run offline; point the config at the
real files when they are available. Distributions are rough, hand-picked
approximations of the public datasets, not fits to them.
"""
from __future__ import annotations

import csv
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

RODD_FEATURES = ("Temperature", "Humidity", "Light", "CO2", "HumidityRatio")
RODD_LABEL = "Occupancy"
GPSD_FEATURES = ("latitude", "longitude")
GPSD_LABEL = "type"
GPSD_ATTACKS = ("backdoor", "ddos", "injection", "password", "ransomware", "scanning", "xss")


def humidity_ratio(temp_c, rel_humidity):
    """kg water / kg dry air at sea-level pressure (Magnus saturation pressure)."""
    p_sat = 610.94 * np.exp(17.625 * temp_c / (temp_c + 243.04))
    p_v = rel_humidity / 100.0 * p_sat
    return 0.622 * p_v / (101325.0 - p_v)


def make_rodd(n_rows: int = 2000, seed: int = 0, occupied_share: float = 0.23, blank_rate: float = 0.005):
    rng = np.random.default_rng(seed)
    y = (rng.random(n_rows) < occupied_share).astype(int)
    occ = y == 1
    temp = np.where(occ, rng.normal(21.5, 0.7, n_rows), rng.normal(20.5, 0.8, n_rows))
    hum = np.clip(np.where(occ, rng.normal(27.0, 4.5, n_rows), rng.normal(25.5, 5.0, n_rows)), 15, 45)
    lights_off = rng.random(n_rows) < 0.12
    daylight = rng.random(n_rows) < 0.3
    light = np.where(
        occ,
        np.where(lights_off, np.abs(rng.normal(60, 60, n_rows)), rng.normal(460, 70, n_rows)),
        np.where(daylight, np.abs(rng.normal(220, 140, n_rows)), np.abs(rng.normal(0, 8, n_rows))),
    )
    co2 = np.clip(np.where(occ, rng.normal(820, 250, n_rows), rng.normal(580, 170, n_rows)), 412, None)
    ratio = humidity_ratio(temp, hum)
    start = datetime(2015, 2, 4, 17, 51)
    rows = []
    for i in range(n_rows):
        rows.append(
            {
                "date": (start + timedelta(minutes=i)).strftime("%Y-%m-%d %H:%M:%S"),
                "Temperature": f"{temp[i]:.4f}",
                "Humidity": f"{hum[i]:.4f}",
                "Light": f"{light[i]:.2f}",
                "CO2": f"{co2[i]:.2f}",
                "HumidityRatio": f"{ratio[i]:.9f}",
                "Occupancy": str(y[i]),
            }
        )
    _blank_cells(rows, RODD_FEATURES, blank_rate, rng)
    return rows


def make_gpsd(n_rows: int = 2000, seed: int = 0, normal_share: float = 0.5, blank_rate: float = 0.005):
    """Genuine fixes cluster around the tracker's operating area; spoofed
    (attack) fixes are injected across a wider surrounding region."""
    rng = np.random.default_rng(seed)
    normal = rng.random(n_rows) < normal_share
    lat_n = rng.normal(40.020, 0.009, n_rows)
    lon_n = rng.normal(116.310, 0.009, n_rows)
    displaced = rng.random(n_rows) < 0.5
    lat_a = np.where(displaced, rng.normal(40.045, 0.010, n_rows), rng.uniform(39.98, 40.06, n_rows))
    lon_a = np.where(displaced, rng.normal(116.285, 0.010, n_rows), rng.uniform(116.27, 116.35, n_rows))
    lat = np.where(normal, lat_n, lat_a)
    lon = np.where(normal, lon_n, lon_a)
    kinds = np.where(normal, "normal", rng.choice(GPSD_ATTACKS, n_rows))
    start = datetime(2019, 4, 25, 9, 0)
    rows = []
    for i in range(n_rows):
        t = start + timedelta(seconds=7 * i)
        rows.append(
            {
                "date": t.strftime("%d-%b-%y"),
                "time": t.strftime("%H:%M:%S"),
                "latitude": f"{lat[i]:.6f}",
                "longitude": f"{lon[i]:.6f}",
                "label": str(int(not normal[i])),
                "type": str(kinds[i]),
            }
        )
    _blank_cells(rows, GPSD_FEATURES, blank_rate, rng)
    return rows


def _blank_cells(rows, columns, rate, rng):
    for row in rows:
        if rng.random() < rate:
            row[columns[rng.integers(len(columns))]] = ""


def write_rows(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_surrogates(directory, seed: int = 0, n_rows: int = 2000) -> dict[str, Path]:
    directory = Path(directory)
    return {
        "rodd": write_rows(make_rodd(n_rows, seed), directory / "rodd_surrogate.csv"),
        "gpsd": write_rows(make_gpsd(n_rows, seed + 1), directory / "gpsd_surrogate.csv"),
    }
