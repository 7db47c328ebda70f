"""Input time series: CSV ingestion, synthetic generation, averaging, net demand.

All functions here are pure; frames and representative-period series are
validated on construction and treated as immutable afterwards.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CaseConfig",
    "SeriesFrame",
    "RepPeriodSeries",
    "SynthParams",
    "builtin_case",
    "BUILTIN_CASES",
    "load_series",
    "synth_series",
    "average_series",
    "average_members",
    "net_demand",
]

HOURS_PER_YEAR = 8736  # 52 whole weeks


@dataclass(frozen=True)
class CaseConfig:
    """Technology parameters of one co-scheduling case.

    Powers in MW, energies in MWh, costs in EUR/MWh, efficiencies
    dimensionless in (0, 1].
    """

    thermal_capacity: float
    thermal_cost: float
    vre_capacity: float
    vre_cost: float
    storage_emin: float
    storage_emax: float
    storage_pc_max: float
    storage_pd_max: float
    eta_c: float
    eta_d: float
    discharge_cost: float
    nse_cost: float

    def __post_init__(self):
        caps = {
            "thermal_capacity": self.thermal_capacity,
            "vre_capacity": self.vre_capacity,
            "storage_pc_max": self.storage_pc_max,
            "storage_pd_max": self.storage_pd_max,
        }
        for name, v in caps.items():
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        for name, v in (("eta_c", self.eta_c), ("eta_d", self.eta_d)):
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not (self.storage_emin <= self.storage_emax):
            raise ValueError("storage_emin must not exceed storage_emax")
        if self.storage_emin < 0.0:
            raise ValueError("storage_emin must be >= 0")
        costs = {
            "thermal_cost": self.thermal_cost,
            "vre_cost": self.vre_cost,
            "discharge_cost": self.discharge_cost,
            "nse_cost": self.nse_cost,
        }
        for name, v in costs.items():
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


# Stock cases: 480 MW thermal (60 EUR/MWh), 1000 MW VRE (solar 1, wind 2.5),
# 5000 EUR/MWh value of lost load; battery 400 MWh @ 100 MW, eta 0.92,
# discharge 1.5; pumped hydro 1600 MWh @ 100 MW, eta 0.9, discharge 0.5.
def _case(vre_cost, emax, eta, c_dis):
    return CaseConfig(
        thermal_capacity=480.0,
        thermal_cost=60.0,
        vre_capacity=1000.0,
        vre_cost=vre_cost,
        storage_emin=0.0,
        storage_emax=emax,
        storage_pc_max=100.0,
        storage_pd_max=100.0,
        eta_c=eta,
        eta_d=eta,
        discharge_cost=c_dis,
        nse_cost=5000.0,
    )


BUILTIN_CASES = {
    "bess-solar": _case(1.0, 400.0, 0.92, 1.5),
    "bess-wind": _case(2.5, 400.0, 0.92, 1.5),
    "phs-solar": _case(1.0, 1600.0, 0.9, 0.5),
    "phs-wind": _case(2.5, 1600.0, 0.9, 0.5),
}


def builtin_case(name: str) -> CaseConfig:
    try:
        return BUILTIN_CASES[name]
    except KeyError:
        raise KeyError(
            f"unknown case {name!r}; choose from {sorted(BUILTIN_CASES)}"
        ) from None


@dataclass(frozen=True)
class SeriesFrame:
    """Hourly demand and per-VRE capacity-factor series over a horizon."""

    demand: np.ndarray
    capacity_factor: dict[str, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "demand", np.asarray(self.demand, dtype=float))
        cf = {k: np.asarray(v, dtype=float) for k, v in self.capacity_factor.items()}
        object.__setattr__(self, "capacity_factor", cf)
        n = self.demand.shape[0]
        if self.demand.ndim != 1:
            raise ValueError("demand must be one-dimensional")
        if np.any(self.demand < 0) or not np.all(np.isfinite(self.demand)):
            bad = int(np.flatnonzero(~((self.demand >= 0) & np.isfinite(self.demand)))[0])
            raise ValueError(f"demand must be finite and >= 0 (first bad row {bad})")
        for name, series in cf.items():
            if series.shape != (n,):
                raise ValueError(f"capacity factor {name!r} length {series.shape} != {n}")
            ok = (series >= 0.0) & (series <= 1.0) & np.isfinite(series)
            if not np.all(ok):
                bad = int(np.flatnonzero(~ok)[0])
                raise ValueError(
                    f"capacity factor {name!r} outside [0, 1] at row {bad}: {series[bad]}"
                )

    @property
    def horizon_len(self) -> int:
        return int(self.demand.shape[0])

    @property
    def cf_names(self) -> tuple[str, ...]:
        return tuple(self.capacity_factor)

    def head(self, n: int) -> "SeriesFrame":
        """First n hours as a new frame."""
        if not (1 <= n <= self.horizon_len):
            raise ValueError(f"n must be in [1, {self.horizon_len}], got {n}")
        return SeriesFrame(
            demand=self.demand[:n].copy(),
            capacity_factor={k: v[:n].copy() for k, v in self.capacity_factor.items()},
        )

    def scale_demand(self, factor: float) -> "SeriesFrame":
        if factor < 0:
            raise ValueError("demand scale must be >= 0")
        return SeriesFrame(
            demand=self.demand * factor,
            capacity_factor={k: v.copy() for k, v in self.capacity_factor.items()},
        )


@dataclass(frozen=True)
class RepPeriodSeries:
    """Weighted representative periods with window-averaged inputs.

    weights[r] is the number of source hours represented by period r; the
    weights always sum to the number of covered hours.
    """

    weights: np.ndarray
    avg_demand: np.ndarray
    avg_cf: dict[str, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=int))
        object.__setattr__(self, "avg_demand", np.asarray(self.avg_demand, dtype=float))
        object.__setattr__(
            self, "avg_cf", {k: np.asarray(v, dtype=float) for k, v in self.avg_cf.items()}
        )
        r = self.weights.shape[0]
        if np.any(self.weights < 1):
            raise ValueError("every representative-period weight must be >= 1")
        if self.avg_demand.shape != (r,):
            raise ValueError("avg_demand length must match weights")
        for name, series in self.avg_cf.items():
            if series.shape != (r,):
                raise ValueError(f"avg_cf {name!r} length must match weights")

    @property
    def n_periods(self) -> int:
        return int(self.weights.shape[0])


def load_series(path, schema: dict | None = None) -> SeriesFrame:
    """Load an hourly series CSV.

    Default schema: a header row with a `demand_mw` column plus one
    `cf_<name>` column per VRE source; a `timestamp` column is ignored.
    `schema` may remap column names: {"demand": "load", "cf": {"solar": "pv"}}.
    """
    demand_col = "demand_mw"
    cf_map: dict[str, str] | None = None
    if schema:
        demand_col = schema.get("demand", demand_col)
        if "cf" in schema:
            cf_map = dict(schema["cf"])

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no data rows") from None
        header = [h.strip() for h in header]
        if demand_col not in header:
            raise ValueError(f"{path}: missing column {demand_col!r}")
        if cf_map is None:
            cf_map = {h[3:]: h for h in header if h.startswith("cf_") and len(h) > 3}
        if not cf_map:
            raise ValueError(f"{path}: no capacity-factor column (cf_<name>) found")
        for name, col in cf_map.items():
            if col not in header:
                raise ValueError(f"{path}: missing column {col!r} (cf {name!r})")
        col_idx = {c: header.index(c) for c in [demand_col, *cf_map.values()]}

        demand = []
        cf = {name: [] for name in cf_map}
        for i, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            for col, j in col_idx.items():
                if j >= len(row) or not row[j].strip():
                    raise ValueError(f"{path}: row {i}: missing value in column {col!r}")
            try:
                d = float(row[col_idx[demand_col]])
            except ValueError:
                raise ValueError(
                    f"{path}: row {i}: non-numeric demand {row[col_idx[demand_col]]!r}"
                ) from None
            if d < 0:
                raise ValueError(f"{path}: row {i}: negative demand {d}")
            demand.append(d)
            for name, col in cf_map.items():
                try:
                    f = float(row[col_idx[col]])
                except ValueError:
                    raise ValueError(
                        f"{path}: row {i}: non-numeric value in column {col!r}"
                    ) from None
                if not (0.0 <= f <= 1.0):
                    raise ValueError(
                        f"{path}: row {i}: capacity factor {f} outside [0, 1] in column {col!r}"
                    )
                cf[name].append(f)

    if not demand:
        raise ValueError(f"{path}: no data rows")
    return SeriesFrame(
        demand=np.array(demand), capacity_factor={k: np.array(v) for k, v in cf.items()}
    )


def write_series(frame: SeriesFrame, path) -> None:
    """Write a frame in the default CSV schema (round-trips load_series)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        names = frame.cf_names
        writer.writerow(["demand_mw", *(f"cf_{n}" for n in names)])
        for i in range(frame.horizon_len):
            writer.writerow(
                [f"{frame.demand[i]:.10g}"]
                + [f"{frame.capacity_factor[n][i]:.10g}" for n in names]
            )


@dataclass(frozen=True)
class SynthParams:
    """Knobs of the synthetic generator; defaults give a 400 MW-ish system
    with evening peaks occasionally above firm capacity (so lost load occurs)
    and VRE lulls that force the storage empty overnight."""

    base_mw: float = 400.0
    daily_amp_mw: float = 130.0
    seasonal_amp_mw: float = 80.0
    noise_mw: float = 18.0
    peak_hour: float = 19.0
    solar_cf_max: float = 0.85
    solar_seasonal: float = 0.30
    wind_cf_mean: float = 0.38
    wind_cf_spread: float = 0.30
    wind_persistence: float = 0.96


def synth_series(
    seed: int,
    years: int,
    profile: str,
    params: SynthParams | None = None,
) -> SeriesFrame:
    """Deterministic synthetic demand + capacity-factor series.

    Demand is base + daily + seasonal sinusoid + bounded noise, clipped at 0.
    Solar is zero at night with a seasonally modulated midday bell; wind is
    persistent (AR(1)) noise squashed into [0, 1]. Horizon is years * 8736.
    """
    if years < 1:
        raise ValueError(f"years must be >= 1, got {years}")
    if profile not in ("solar", "wind"):
        raise ValueError(f"profile must be 'solar' or 'wind', got {profile!r}")
    p = params or SynthParams()
    rng = np.random.default_rng(seed)
    n = years * HOURS_PER_YEAR
    t = np.arange(n)
    hour = t % 24
    doy = (t // 24) % 364

    daily = np.cos(2 * np.pi * (hour - p.peak_hour) / 24.0)
    seasonal = np.cos(2 * np.pi * (doy - 15) / 364.0)  # winter-peaking
    noise = rng.uniform(-p.noise_mw, p.noise_mw, size=n)
    demand = np.maximum(
        0.0, p.base_mw + p.daily_amp_mw * daily + p.seasonal_amp_mw * seasonal + noise
    )

    if profile == "solar":
        # Daylight 6..18 scaled by a summer-peaking seasonal envelope.
        day_pos = (hour - 6.0) / 12.0
        bell = np.where((day_pos > 0) & (day_pos < 1), np.sin(np.pi * day_pos) ** 2, 0.0)
        envelope = p.solar_cf_max * (1.0 - p.solar_seasonal * (seasonal + 1.0) / 2.0)
        weather = 1.0 - 0.35 * rng.random(n)
        cf = np.clip(bell * envelope * weather, 0.0, 1.0)
        name = "solar"
    else:
        steps = rng.normal(0.0, 1.0, size=n)
        ar = np.empty(n)
        acc = 0.0
        rho = p.wind_persistence
        sigma = math.sqrt(1.0 - rho * rho)
        for i in range(n):
            acc = rho * acc + sigma * steps[i]
            ar[i] = acc
        cf = np.clip(p.wind_cf_mean + p.wind_cf_spread * ar, 0.0, 1.0)
        name = "wind"

    return SeriesFrame(demand=demand, capacity_factor={name: cf})


def average_members(frame: SeriesFrame, members: np.ndarray) -> tuple[float, dict[str, float]]:
    """Arithmetic means of demand and capacity factors over a set of source hours."""
    idx = np.asarray(members, dtype=int)
    d = float(frame.demand[idx].mean())
    cf = {k: float(v[idx].mean()) for k, v in frame.capacity_factor.items()}
    return d, cf


def average_series(frame: SeriesFrame, partition) -> RepPeriodSeries:
    """Representative-period averages for every period of a partition, in order.

    The partition must cover [0, horizon_len) without gaps or overlaps.
    """
    n = frame.horizon_len
    seen = np.zeros(n, dtype=bool)
    weights, avg_d = [], []
    avg_cf = {k: [] for k in frame.capacity_factor}
    for sub in partition.submodels:
        for rep in sub.periods:
            idx = rep.members
            if idx.size == 0:
                raise ValueError("empty representative period")
            if np.any(idx < 0) or np.any(idx >= n):
                raise ValueError("representative period outside horizon")
            if np.any(seen[idx]):
                raise ValueError("partition overlaps itself")
            seen[idx] = True
            d, cf = average_members(frame, idx)
            weights.append(idx.size)
            avg_d.append(d)
            for k in avg_cf:
                avg_cf[k].append(cf[k])
    if not np.all(seen):
        gap = int(np.flatnonzero(~seen)[0])
        raise ValueError(f"partition leaves a gap at hour {gap}")
    return RepPeriodSeries(
        weights=np.array(weights, dtype=int),
        avg_demand=np.array(avg_d),
        avg_cf={k: np.array(v) for k, v in avg_cf.items()},
    )


def net_demand(frame: SeriesFrame, case: CaseConfig) -> np.ndarray:
    """Demand net of available VRE potential, floored at zero."""
    vre = np.zeros(frame.horizon_len)
    for series in frame.capacity_factor.values():
        vre += case.vre_capacity * series
    return np.maximum(0.0, frame.demand - vre)
