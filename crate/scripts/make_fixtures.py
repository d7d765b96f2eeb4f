#!/usr/bin/env python3
"""Regenerates the fixtures under data/.

Everything is deterministic (fixed seed). The weather and appliance series
are synthetic; the building parameters are representative values for the
German TABULA single-family types SFH.05 (1958-1968) and SFH.07 (1979-1983).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
SEED = 20190101
YEAR = 2019
STEP = 900  # s
N = 365 * 96
TARGET_MEAN = 10.512
LATITUDE = 49.1

# TABULA heating degree-time for Germany: 222 days at 4.4 °C mean outdoor
# temperature against 20 °C inside.
HEATING_DAYS = 222
THETA_E_HS = 4.4
HDD = HEATING_DAYS * (20.0 - THETA_E_HS)  # K·d

# id, label, A_ref (m²), storeys, F_red, surfaces [(kind, area, U)]
BUILDINGS = [
    (
        "sfh05_001",
        "DE.N.SFH.05.Gen.ReEx.001",
        110.0,
        2,
        0.85,
        [("roof", 95.0, 0.80), ("wall", 150.0, 1.20), ("floor", 70.0, 0.90), ("window", 25.0, 2.80)],
    ),
    (
        "sfh05_002",
        "DE.N.SFH.05.Gen.ReEx.002",
        110.0,
        2,
        0.93,
        [("roof", 95.0, 0.20), ("wall", 150.0, 0.25), ("floor", 70.0, 0.32), ("window", 25.0, 1.30)],
    ),
    (
        "sfh07_001",
        "DE.N.SFH.07.Gen.ReEx.001",
        150.0,
        2,
        0.89,
        [("roof", 120.0, 0.45), ("wall", 175.0, 0.60), ("floor", 95.0, 0.80), ("window", 32.0, 2.70)],
    ),
    (
        "sfh07_002",
        "DE.N.SFH.07.Gen.ReEx.002",
        150.0,
        2,
        0.95,
        [("roof", 120.0, 0.18), ("wall", 175.0, 0.23), ("floor", 95.0, 0.30), ("window", 32.0, 1.30)],
    ),
]
DELTA_U_TBR = 0.1
N_AIR = 0.6
ROOM_HEIGHT = 2.5
B_TR = {"roof": 1.0, "wall": 1.0, "floor": 0.5, "window": 1.0}

# kWh/a starting split; rescaled to the published totals below
APPLIANCES = [
    ("light", 0.95, 450.0, "evening"),
    ("stove", 0.99, 380.0, "meals"),
    ("coffee_machine", 0.10, 60.0, "morning"),
    ("toaster", 0.98, 30.0, "morning"),
    ("electric_kettle", 0.90, 120.0, "meals"),
    ("entertainment", 0.50, 520.0, "evening"),
    ("hood", 0.01, 40.0, "meals"),
    ("oven", 0.98, 260.0, "meals"),
    ("dryer", 0.95, 330.0, "day"),
    ("fridge", 1.00, 420.0, "flat"),
    ("dishwasher", 0.05, 250.0, "evening"),
    ("microwave", 0.30, 60.0, "meals"),
    ("washing_machine", 0.01, 200.0, "day"),
    ("hair_dryer", 0.90, 40.0, "morning"),
    ("vehicle", 0.00, 1450.0, "night"),
]
ELECTRICITY_KWH = 4602.0
HEAT_KWH = 3220.0


def timestamps() -> list[str]:
    out = []
    for k in range(N):
        s = k * STEP
        day, rem = divmod(s, 86400)
        h, rem = divmod(rem, 3600)
        m = rem // 60
        out.append(f"{day_to_date(day)}T{h:02d}:{m:02d}:00")
    return out


def day_to_date(day: int) -> str:
    months = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]
    m = 0
    while day >= months[m]:
        day -= months[m]
        m += 1
    return f"{YEAR}-{m + 1:02d}-{day + 1:02d}"


def weather(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(N) * STEP / 86400.0  # days
    doy = t
    hour = (t % 1.0) * 24.0
    seasonal = -9.3 * np.cos(2 * math.pi * (doy - 19.0) / 365.0)
    # larger daily swing in summer
    swing = 3.0 + 2.0 * np.clip(-np.cos(2 * math.pi * (doy - 19.0) / 365.0), 0, None)
    diurnal = swing * np.cos(2 * math.pi * (hour - 15.0) / 24.0)
    # synoptic variation: AR(1) on hourly values, correlation time ~2.5 days
    hours = N // 4
    phi = math.exp(-1.0 / 60.0)
    eps = rng.normal(0.0, 2.6 * math.sqrt(1 - phi * phi), hours)
    ar = np.empty(hours)
    ar[0] = 0.0
    for i in range(1, hours):
        ar[i] = phi * ar[i - 1] + eps[i]
    synoptic = np.interp(np.arange(N) / 4.0, np.arange(hours), ar)
    temp = TARGET_MEAN + seasonal + diurnal + synoptic
    temp += TARGET_MEAN - temp.mean()

    # clear-sky irradiance from solar elevation, damped by daily cloudiness
    decl = np.radians(23.44) * np.sin(2 * math.pi * (doy + 284.0) / 365.0)
    ha = np.radians(15.0 * (hour + 0.125 - 12.0))
    lat = math.radians(LATITUDE)
    sin_el = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(ha)
    sin_el = np.clip(sin_el, 0.0, None)
    clear = 1098.0 * sin_el * np.exp(-0.057 / np.maximum(sin_el, 1e-3))
    clouds = np.repeat(rng.uniform(0.25, 1.0, 365), 96)
    ghi = np.where(sin_el > 0.0, clear * clouds, 0.0)
    return np.round(temp, 4), np.round(ghi, 2)


def shape(kind: str) -> np.ndarray:
    """Relative power in each of the 96 slots of a day."""
    h = np.arange(96) / 4.0
    if kind == "flat":
        w = 1.0 + 0.15 * np.cos(2 * math.pi * (h - 16.0) / 24.0)
    elif kind == "evening":
        w = np.where((h >= 17) & (h < 23.5), 1.0, 0.05) + np.where((h >= 6) & (h < 8), 0.4, 0.0)
    elif kind == "morning":
        w = np.where((h >= 6) & (h < 8.5), 1.0, 0.0)
    elif kind == "meals":
        w = np.where((h >= 7) & (h < 8), 0.5, 0.0) + np.where((h >= 12) & (h < 13), 1.0, 0.0)
        w = w + np.where((h >= 18) & (h < 19.5), 1.0, 0.0)
    elif kind == "day":
        w = np.where((h >= 9) & (h < 17), 1.0, 0.0)
    elif kind == "night":
        w = np.where((h >= 22) | (h < 5), 1.0, 0.0)
    else:
        raise ValueError(kind)
    return w / w.sum()


def appliance_table(rng: np.random.Generator) -> tuple[list[str], np.ndarray]:
    names = [a[0] for a in APPLIANCES]
    ratios = np.array([a[1] for a in APPLIANCES])
    base = np.array([a[2] for a in APPLIANCES])
    # scale high- and low-ratio groups separately to hit both totals
    hi = ratios >= 0.5
    a = np.array([[base[hi].sum(), base[~hi].sum()], [(ratios * base)[hi].sum(), (ratios * base)[~hi].sum()]])
    alpha, beta = np.linalg.solve(a, [ELECTRICITY_KWH, HEAT_KWH])
    energy = np.where(hi, alpha * base, beta * base)  # kWh/a per category

    table = np.empty((N, len(names)))
    for j, (_, _, _, kind) in enumerate(APPLIANCES):
        day = np.tile(shape(kind), 365)
        # day-to-day variation, renormalized so the annual energy is exact
        day *= np.repeat(rng.uniform(0.6, 1.4, 365), 96)
        day /= day.sum()
        table[:, j] = day * energy[j] * 3.6e6 / STEP  # W
    return names, table


def write_weather(stamps: list[str], temp: np.ndarray, ghi: np.ndarray) -> None:
    with open(DATA / "weather.csv", "w", newline="\n") as f:
        f.write("timestamp,temperature_c,ghi_w_m2\n")
        for s, t, g in zip(stamps, temp, ghi):
            f.write(f"{s},{t:.4f},{g:.2f}\n")


def write_appliances(stamps: list[str], names: list[str], table: np.ndarray) -> None:
    with open(DATA / "appliances.csv", "w", newline="\n") as f:
        f.write("timestamp," + ",".join(names) + "\n")
        for s, row in zip(stamps, table):
            f.write(s + "," + ",".join(f"{v:.6f}" for v in row) + "\n")


def reference_rows() -> list[tuple[str, str, float, str]]:
    """TABULA energy balance: Q = 0.024 kh/d · HDD · F_red · H."""
    rows = []
    for bid, label, a_ref, _, f_red, surfaces in BUILDINGS:
        h_tr = sum((B_TR[k] * u + DELTA_U_TBR) * a for k, a, u in surfaces)
        h_ve = 0.34 * N_AIR * a_ref * ROOM_HEIGHT
        q_tr = 0.024 * HDD * f_red * h_tr
        q_ve = 0.024 * HDD * f_red * h_ve
        src = f"{label} representative values; TABULA method"
        rows.append((bid, "q_ht_tr", round(q_tr, 1), src))
        rows.append((bid, "q_ht_ven", round(q_ve, 1), src))
        rows.append((bid, "q_ht_total", round(q_tr + q_ve, 1), src))
    return rows


def write_reference() -> None:
    with open(DATA / "tabula_reference.csv", "w", newline="\n") as f:
        f.write("# TABULA-method annual heat transfer, kWh/a\n")
        f.write("building,indicator,value,source\n")
        for b, ind, v, src in reference_rows():
            f.write(f"{b},{ind},{v},{src}\n")


def building_toml(ac: dict, flags: dict, tank_ua: float | None = None) -> str:
    out = []
    for bid, label, a_ref, storeys, f_red, surfaces in BUILDINGS:
        out.append("[[buildings]]")
        out.append(f'id = "{bid}"')
        out.append(f'label = "{label}"')
        out.append(f"floor_area_m2 = {a_ref / storeys}")
        out.append(f"storeys = {storeys}")
        out.append('construction = "medium"')
        out.append(f"f_red = {f_red}")
        out.append(f"delta_u_tbr = {DELTA_U_TBR}")
        out.append(f"n_air_rate_per_h = {N_AIR}")
        out.append(f"ceiling_height_m = {ROOM_HEIGHT}")
        out.append("flags = { " + ", ".join(f"{k} = {v}" for k, v in flags.items()) + " }")
        out.append("air_conditioner = { " + ", ".join(f"{k} = {v}" for k, v in ac.items()) + " }")
        if tank_ua is not None:
            out.append(f"tank = {{ ua_loss_w_k = {tank_ua} }}")
        out.append("surfaces = [")
        for k, a, u in surfaces:
            extra = ", solar_aperture = 0.4" if k == "window" else ""
            out.append(f'  {{ kind = "{k}", area_m2 = {a}, u_value = {u}{extra} }},')
        out.append("]")
        out.append("")
    return "\n".join(out)


def write_scenarios() -> None:
    validation = (
        "# Stand-alone validation: ideal air conditioner holds 20 °C all year,\n"
        "# no grid, radiators off.\n\n"
        "[simulation]\n"
        "dt_comm_s = 900.0\nsubstep_s = 60.0\nset_point_c = 20.0\n\n"
        "[files]\nweather = \"weather.csv\"\nappliances = \"appliances.csv\"\n\n"
        + building_toml(
            {"heating_capacity_w": 50000.0, "cooling_capacity_w": 50000.0, "deadband_k": 0.0},
            {"radiator": 0, "ventilation": 1, "air_conditioner": 1, "appliances": 1, "dhw": 0},
        )
    )
    (DATA / "validation.toml").write_text(validation)

    district = (
        "# Four buildings on the synthetic network, heated by radiators from\n"
        "# their buffer tanks. Air conditioning off, DHW off.\n\n"
        "[simulation]\n"
        "dt_comm_s = 900.0\nsubstep_s = 60.0\nset_point_c = 20.0\n\n"
        "[files]\nweather = \"weather.csv\"\nappliances = \"appliances.csv\"\ntopology = \"network.toml\"\n\n"
        "[grid]\n"
        'id = "grid"\n'
        'supply = { kind = "constant", t_supply_c = 105.0 }\nsupply_level_c = 90.0\n\n'
        + building_toml(
            {"heating_capacity_w": 50000.0, "cooling_capacity_w": 50000.0, "deadband_k": 0.0},
            {"radiator": 1, "ventilation": 1, "air_conditioner": 0, "appliances": 1, "dhw": 0},
        )
    )
    (DATA / "district.toml").write_text(district)


NETWORK = """# Synthetic 4-building radial network (not from GIS).
[[nodes]]
id = "plant"
kind = "source"

[[nodes]]
id = "J1"
kind = "junction"
x = 200.0

[[nodes]]
id = "J2"
kind = "junction"
x = 350.0

[[nodes]]
id = "S1"
kind = "substation"
building = "sfh05_001"
x = 200.0
y = 80.0

[[nodes]]
id = "S2"
kind = "substation"
building = "sfh05_002"
x = 350.0
y = 60.0

[[nodes]]
id = "S3"
kind = "substation"
building = "sfh07_001"
x = 450.0

[[nodes]]
id = "S4"
kind = "substation"
building = "sfh07_002"
x = 350.0
y = -80.0

[[pipes]]
id = "P1"
from = "plant"
to = "J1"
length_m = 200.0
u_prime_W_per_mK = 0.3
diameter_m = 0.065

[[pipes]]
id = "P2"
from = "J1"
to = "S1"
length_m = 80.0
u_prime_W_per_mK = 0.2
diameter_m = 0.032

[[pipes]]
id = "P3"
from = "J1"
to = "J2"
length_m = 150.0
u_prime_W_per_mK = 0.25
diameter_m = 0.05

[[pipes]]
id = "P4"
from = "J2"
to = "S2"
length_m = 60.0
u_prime_W_per_mK = 0.2
diameter_m = 0.032

[[pipes]]
id = "P5"
from = "J2"
to = "S3"
length_m = 100.0
u_prime_W_per_mK = 0.2
diameter_m = 0.032

[[pipes]]
id = "P6"
from = "J2"
to = "S4"
length_m = 80.0
u_prime_W_per_mK = 0.2
diameter_m = 0.032
"""


def main() -> None:
    DATA.mkdir(exist_ok=True)
    rng = np.random.default_rng(SEED)
    stamps = timestamps()
    temp, ghi = weather(rng)
    names, table = appliance_table(rng)
    write_weather(stamps, temp, ghi)
    write_appliances(stamps, names, table)
    write_reference()
    write_scenarios()
    (DATA / "network.toml").write_text(NETWORK)

    ratios = np.array([a[1] for a in APPLIANCES])
    e = table.sum(axis=0) * STEP / 3.6e6
    print(f"weather mean {temp.mean():.4f} °C, heating-season mean {season_mean(temp):.2f} °C")
    print(f"appliances {e.sum():.1f} kWh electricity, {(ratios * e).sum():.1f} kWh heat")


def season_mean(temp: np.ndarray) -> float:
    day = np.arange(N) // 96
    mask = (day < 130) | (day >= 273)
    return float(temp[mask].mean())


if __name__ == "__main__":
    main()
