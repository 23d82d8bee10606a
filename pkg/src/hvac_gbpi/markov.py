"""Per-stage Markov chains for outdoor temperature, outdoor humidity and occupancy.

Chains are estimated by transition counting over historical days, sampled to
produce exogenous scenarios, and persisted as versioned JSON.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

N_STAGES = 48
STAGE_MINUTES = 30
CHAIN_FORMAT = "hvac-gbpi-chains"
CHAIN_VERSION = 1


class DataError(ValueError):
    pass


class EmptyData(DataError):
    pass


class GridMismatch(DataError):
    pass


@dataclass(frozen=True)
class LevelGrid:
    """Equal-width bins over [lo, hi]; a level maps to its bin midpoint."""

    lo: float
    hi: float
    step: float
    count: int = 0

    def __post_init__(self):
        if not self.step > 0 or not self.hi > self.lo:
            raise ValueError("grid needs step > 0 and hi > lo")
        if self.count == 0:
            object.__setattr__(self, "count", max(1, math.ceil((self.hi - self.lo) / self.step - 1e-9)))
        if self.count < 1 or self.lo + (self.count - 1) * self.step < self.hi - self.step - 1e-9:
            raise ValueError("grid levels do not cover [lo, hi]")

    def level(self, x):
        idx = np.floor((np.asarray(x, dtype=float) - self.lo) / self.step + 1e-9).astype(np.int64)
        idx = np.clip(idx, 0, self.count - 1)
        return int(idx) if idx.ndim == 0 else idx

    def value(self, level):
        v = self.lo + (np.asarray(level, dtype=float) + 0.5) * self.step
        return float(v) if v.ndim == 0 else v

    @property
    def values(self) -> np.ndarray:
        return self.value(np.arange(self.count))

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "step": self.step, "count": self.count}


def _check_stochastic(p: np.ndarray, name: str):
    if p.ndim != 3 or p.shape[1] != p.shape[2]:
        raise GridMismatch(f"{name}: expected [T-1][L][L] matrices, got {p.shape}")
    if np.any(p < 0) or np.any(p > 1) or not np.allclose(p.sum(axis=2), 1.0, atol=1e-9, rtol=0):
        raise ValueError(f"{name}: rows must be probability vectors")


@dataclass(frozen=True)
class MarkovChainSet:
    temp: np.ndarray  # [T-1, L_T, L_T]
    humid: np.ndarray
    occ: np.ndarray

    def __post_init__(self):
        for name in ("temp", "humid", "occ"):
            _check_stochastic(getattr(self, name), name)
        if not self.temp.shape[0] == self.humid.shape[0] == self.occ.shape[0]:
            raise GridMismatch("chains cover different numbers of stages")

    @property
    def n_stages(self) -> int:
        return self.temp.shape[0] + 1

    @property
    def levels(self) -> tuple[int, int, int]:
        return self.temp.shape[1], self.humid.shape[1], self.occ.shape[1]


@dataclass
class WeatherDay:
    timestamps: np.ndarray  # datetime64[s]
    temp_c: np.ndarray
    rh: np.ndarray  # fraction
    solar: np.ndarray | None = None

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype="datetime64[s]")
        self.temp_c = np.asarray(self.temp_c, dtype=float)
        self.rh = np.asarray(self.rh, dtype=float)
        if self.solar is not None:
            self.solar = np.asarray(self.solar, dtype=float)
        if np.any(np.diff(self.timestamps.astype(np.int64)) <= 0):
            raise DataError("timestamps must be strictly increasing within a day")


@dataclass
class WeatherSeries:
    days: list[WeatherDay] = field(default_factory=list)

    def __len__(self):
        return len(self.days)


# -- estimation ---------------------------------------------------------------

def resample_day(day: WeatherDay, n_stages: int = N_STAGES):
    """Stage means of temperature, rh and solar over equal windows of the day.

    Windows without samples are filled by linear interpolation between their
    neighbours.
    """
    if day.timestamps.size == 0:
        raise EmptyData("day without samples")
    start = day.timestamps[0].astype("datetime64[D]").astype("datetime64[s]")
    secs = (day.timestamps - start).astype(np.int64)
    window = 86400 // n_stages
    idx = np.clip(secs // window, 0, n_stages - 1)
    counts = np.bincount(idx, minlength=n_stages)
    have = counts > 0
    out = []
    for series in (day.temp_c, day.rh, day.solar):
        if series is None:
            out.append(None)
            continue
        sums = np.bincount(idx, weights=series, minlength=n_stages)
        means = np.zeros(n_stages)
        means[have] = sums[have] / counts[have]
        if not have.all():
            stages = np.arange(n_stages)
            means = np.interp(stages, stages[have], means[have])
        out.append(means)
    return tuple(out)


def transition_matrices(levels: np.ndarray, n_levels: int) -> np.ndarray:
    """Counting estimator p[t, i, j] = #(i -> j at t) / #(i at t) over rows of ``levels``.

    Rows never visited at stage t fall back to staying put with probability 1.
    """
    levels = np.asarray(levels, dtype=np.int64)
    if levels.ndim != 2 or levels.shape[0] == 0:
        raise EmptyData("need at least one day of level data")
    if levels.min() < 0 or levels.max() >= n_levels:
        raise GridMismatch("level outside the grid")
    n_days, n_stages = levels.shape
    counts = np.zeros((n_stages - 1, n_levels, n_levels))
    t_idx = np.broadcast_to(np.arange(n_stages - 1), (n_days, n_stages - 1))
    np.add.at(counts, (t_idx, levels[:, :-1], levels[:, 1:]), 1.0)
    totals = counts.sum(axis=2, keepdims=True)
    eye = np.broadcast_to(np.eye(n_levels), counts.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), eye)
    return probs


def discretize_weather(weather: WeatherSeries, temp_grid: LevelGrid, humid_grid: LevelGrid,
                       n_stages: int = N_STAGES):
    """Per-day stage levels for temperature and humidity, plus stage-mean solar (or None)."""
    if len(weather) == 0:
        raise EmptyData("weather series has no days")
    temps, hums, solars = [], [], []
    for day in weather.days:
        t, h, s = resample_day(day, n_stages)
        temps.append(temp_grid.level(t))
        hums.append(humid_grid.level(h))
        if s is not None:
            solars.append(s)
    solar = np.mean(solars, axis=0) if solars else None
    return np.array(temps), np.array(hums), solar


def estimate_chains(weather: WeatherSeries, temp_grid: LevelGrid, humid_grid: LevelGrid,
                    occupancy: np.ndarray | None = None, occ_levels: int = 5,
                    n_stages: int = N_STAGES) -> MarkovChainSet:
    """Estimate all three chains. Without occupancy traces the default working-hours chain is used."""
    temps, hums, _ = discretize_weather(weather, temp_grid, humid_grid, n_stages)
    if occupancy is None:
        occ = default_occupancy_chain(n_stages, occ_levels)
    else:
        occupancy = np.asarray(occupancy)
        if occupancy.ndim != 2 or occupancy.shape[1] != n_stages:
            raise GridMismatch(f"occupancy traces must have {n_stages} stages per day")
        occ = transition_matrices(occupancy, occ_levels)
    return MarkovChainSet(transition_matrices(temps, temp_grid.count),
                          transition_matrices(hums, humid_grid.count), occ)


def default_occupancy_chain(n_stages: int = N_STAGES, n_levels: int = 5) -> np.ndarray:
    """Working-hours occupancy: empty until 08:00, ramping to full by 09:00, leaving after 18:00."""
    hours = (np.arange(n_stages) + 0.5) * 24.0 / n_stages
    top = n_levels - 1
    target = np.interp(hours, [0, 8, 9, 12, 13, 18, 20, 24], [0, 0, top, top, 0.75 * top, top, 0, 0])
    levels = np.arange(n_levels)
    p = np.empty((n_stages - 1, n_levels, n_levels))
    for t in range(n_stages - 1):
        pull = np.exp(-0.5 * ((levels - target[t + 1]) / 0.6) ** 2)
        for i in range(n_levels):
            row = pull * np.exp(-0.5 * ((levels - i) / 1.5) ** 2)
            p[t, i] = row / row.sum()
    return p


# -- sampling -----------------------------------------------------------------

def sample_levels(p: np.ndarray, initial, rng: np.random.Generator, n_paths: int | None = None):
    """Trajectories of one chain; shape (T,) or (n_paths, T)."""
    shape = () if n_paths is None else (n_paths,)
    cur = np.broadcast_to(np.asarray(initial, dtype=np.int64), shape).copy()
    out = np.empty(shape + (p.shape[0] + 1,), dtype=np.int64)
    out[..., 0] = cur
    for t in range(p.shape[0]):
        cdf = np.cumsum(p[t, cur], axis=-1)
        u = rng.random(shape + (1,))
        nxt = (u > cdf).sum(axis=-1)
        cur = np.minimum(nxt, p.shape[1] - 1)
        out[..., t + 1] = cur
    return out


def sample_exogenous(chains: MarkovChainSet, rng_seed, initial_levels=(0, 0, 0), n_paths: int | None = None):
    """One day (or ``n_paths`` days) of (temperature, humidity, occupancy) levels.

    ``rng_seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(rng_seed)
    t0, h0, o0 = initial_levels
    return (sample_levels(chains.temp, t0, rng, n_paths),
            sample_levels(chains.humid, h0, rng, n_paths),
            sample_levels(chains.occ, o0, rng, n_paths))


# -- synthetic weather --------------------------------------------------------

@dataclass(frozen=True)
class WeatherProfile:
    temp_mean: float = 28.0
    temp_amplitude: float = 5.0
    temp_peak_hour: float = 14.0
    rh_mean: float = 0.72
    rh_amplitude: float = 0.2
    temp_noise: float = 0.6  # C, per-sample
    rh_noise: float = 0.03
    day_temp_spread: float = 0.8  # C, day-to-day offset
    day_rh_spread: float = 0.04
    solar_peak: float = 300.0  # W/m2 on the sunlit wall
    sunrise: float = 7.0
    sunset: float = 19.0
    temp_range: tuple[float, float] = (22.0, 34.0)
    rh_range: tuple[float, float] = (0.40, 1.00)


def solar_profile(hours, profile: WeatherProfile = WeatherProfile()):
    hours = np.asarray(hours, dtype=float)
    frac = (hours - profile.sunrise) / (profile.sunset - profile.sunrise)
    return np.where((frac > 0) & (frac < 1), profile.solar_peak * np.sin(np.pi * np.clip(frac, 0, 1)), 0.0)


def synth_weather(profile: WeatherProfile = WeatherProfile(), n_days: int = 43, rng_seed=0,
                  resolution_minutes: int = STAGE_MINUTES, start: str = "2019-09-01") -> WeatherSeries:
    """Diurnal sinusoid weather: temperature peaks at ``temp_peak_hour``, rh runs in anti-phase."""
    rng = np.random.default_rng(rng_seed)
    per_day = 24 * 60 // resolution_minutes
    minutes = np.arange(per_day) * resolution_minutes
    hours = minutes / 60.0
    phase = np.cos(2 * np.pi * (hours - profile.temp_peak_hour) / 24.0)
    base_day = np.datetime64(start, "D")
    days = []
    for d in range(n_days):
        t_off = profile.day_temp_spread * rng.standard_normal() if profile.day_temp_spread else 0.0
        h_off = profile.day_rh_spread * rng.standard_normal() if profile.day_rh_spread else 0.0
        temp = profile.temp_mean + t_off + profile.temp_amplitude * phase
        rh = profile.rh_mean + h_off - profile.rh_amplitude * phase
        if profile.temp_noise:
            temp = temp + profile.temp_noise * rng.standard_normal(per_day)
        if profile.rh_noise:
            rh = rh + profile.rh_noise * rng.standard_normal(per_day)
        temp = np.clip(temp, *profile.temp_range)
        rh = np.clip(rh, *profile.rh_range)
        stamps = (base_day + d).astype("datetime64[s]") + (minutes * 60).astype("timedelta64[s]")
        days.append(WeatherDay(stamps, temp, rh, solar_profile(hours, profile)))
    return WeatherSeries(days)


# -- persistence --------------------------------------------------------------

def read_weather_csv(path) -> WeatherSeries:
    """Read ``timestamp,temp_c,rh_pct[,solar_wm2]`` rows; rh is converted from percent."""
    rows_by_day: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"timestamp", "temp_c", "rh_pct"} <= set(reader.fieldnames):
            raise DataError("weather CSV needs header timestamp,temp_c,rh_pct[,solar_wm2]")
        has_solar = "solar_wm2" in reader.fieldnames
        for lineno, row in enumerate(reader, start=2):
            try:
                ts = datetime.fromisoformat(row["timestamp"])
                rec = (np.datetime64(ts.replace(tzinfo=None), "s"), float(row["temp_c"]),
                       float(row["rh_pct"]) / 100.0, float(row["solar_wm2"]) if has_solar else None)
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            rows_by_day.setdefault(ts.date().isoformat(), []).append(rec)
    if not rows_by_day:
        raise EmptyData(f"{path}: no data rows")
    days = []
    for key in sorted(rows_by_day):
        recs = rows_by_day[key]
        solar = np.array([r[3] for r in recs]) if has_solar else None
        days.append(WeatherDay(np.array([r[0] for r in recs]), np.array([r[1] for r in recs]),
                               np.array([r[2] for r in recs]), solar))
    return WeatherSeries(days)


def write_weather_csv(weather: WeatherSeries, path):
    has_solar = all(d.solar is not None for d in weather.days)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "temp_c", "rh_pct"] + (["solar_wm2"] if has_solar else []))
        for day in weather.days:
            for i, ts in enumerate(day.timestamps):
                row = [str(ts), repr(float(day.temp_c[i])), repr(float(day.rh[i]) * 100.0)]
                if has_solar:
                    row.append(repr(float(day.solar[i])))
                w.writerow(row)


def save_chains(chains: MarkovChainSet, path, grids: dict | None = None, solar=None):
    """Versioned JSON; ``grids`` and the stage solar profile are stored alongside when given."""
    doc = {
        "format": CHAIN_FORMAT,
        "version": CHAIN_VERSION,
        "n_stages": chains.n_stages,
        "grids": {k: g.to_dict() for k, g in (grids or {}).items()},
        "solar": None if solar is None else [float(x) for x in solar],
        "temp": chains.temp.tolist(),
        "humid": chains.humid.tolist(),
        "occ": chains.occ.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def load_chains(path):
    """Returns (chains, grids, solar)."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read chain file {path}: {exc}") from None
    if doc.get("format") != CHAIN_FORMAT or doc.get("version") != CHAIN_VERSION:
        raise DataError(f"{path}: not a version-{CHAIN_VERSION} chain file")
    chains = MarkovChainSet(np.array(doc["temp"], dtype=float), np.array(doc["humid"], dtype=float),
                            np.array(doc["occ"], dtype=float))
    grids = {k: LevelGrid(**v) for k, v in doc.get("grids", {}).items()}
    solar = None if doc.get("solar") is None else np.array(doc["solar"])
    return chains, grids, solar
