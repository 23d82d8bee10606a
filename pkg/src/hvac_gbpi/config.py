"""Experiment configuration: INI files with one section per block, and the three case presets."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .comfort import ComfortBand
from .markov import (N_STAGES, LevelGrid, MarkovChainSet, WeatherProfile, discretize_weather, estimate_chains,
                     load_chains, read_weather_csv, solar_profile, synth_weather)
from .mdp import ActionSpace, HvacMdp, PmvSettings, StateSpace, windows_from_levels
from .thermal import DT, ContinuousState, HvacParams, RoomParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    t_out: tuple[float, float, float] = (22.0, 34.0, 2.0)  # lo, hi, step
    rh_out: tuple[float, float, float] = (0.40, 1.00, 0.10)
    t_in: tuple[float, float, float] = (18.0, 32.0, 2.0)
    rh_in: tuple[float, float, float] = (0.30, 1.00, 0.10)
    occ_levels: int = 5
    max_occupants: float = 5.0
    window_margin: int = 1  # negative disables the per-stage outdoor windows
    flow_levels: int = 5
    set_temps: tuple[float, ...] = (15.0,)


@dataclass(frozen=True)
class ComfortConfig:
    pmv_low: float = -0.5
    pmv_high: float = 0.5
    metabolic_rate: float = 1.0
    clothing: float = 1.0
    air_velocity: float = 0.2
    mechanical_work: float = 0.0
    init_temp_band: tuple[float, float] = (23.0, 28.0)
    init_rh_band: tuple[float, float] = (0.40, 0.70)
    strategy_two: bool = True


@dataclass(frozen=True)
class PriceConfig:
    """Hour ranges mapped to prices (currency/kWh); ranges must tile [0, 24)."""

    schedule: tuple[tuple[float, float, float], ...] = ((0.0, 9.0, 0.20), (9.0, 21.0, 0.30), (21.0, 24.0, 0.20))

    def at_hours(self, hours) -> np.ndarray:
        hours = np.asarray(hours, dtype=float) % 24.0
        out = np.full(hours.shape, np.nan)
        for lo, hi, price in self.schedule:
            out[(hours >= lo) & (hours < hi)] = price
        if np.any(np.isnan(out)):
            raise ConfigError("price schedule leaves hours uncovered")
        return out


@dataclass(frozen=True)
class WeatherConfig:
    csv: str = ""  # historical weather; empty means synthetic
    chains: str = ""  # a saved chain file overrides both
    synth_days: int = 43
    synth_seed: int = 0
    solar_peak: float = 300.0


@dataclass(frozen=True)
class SimConfig:
    n_stages: int = N_STAGES
    start_stage: int = 0  # stage of the day the horizon begins at
    dt: float = DT
    device_heat: float = 100.0  # W per occupant
    t_indoor: float = 23.0
    rh_indoor: float = 0.55
    t_wall: float = 23.0
    penalty: float = 0.0  # 0 selects the default from the price and power scale


@dataclass(frozen=True)
class LearnConfig:
    n_paths: int = 2000
    epsilon: float = 1e-3
    max_iterations: int = 20
    min_visits: int = 10
    cost_scale: float = 100.0
    eval_scenarios: int = 100


@dataclass(frozen=True)
class ExperimentConfig:
    case: int = 2
    seed: int = 0
    room: RoomParams = field(default_factory=RoomParams)
    hvac: HvacParams = field(default_factory=HvacParams)
    grid: GridConfig = field(default_factory=GridConfig)
    comfort: ComfortConfig = field(default_factory=ComfortConfig)
    price: PriceConfig = field(default_factory=PriceConfig)
    weather: WeatherConfig = field(default_factory=WeatherConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    learn: LearnConfig = field(default_factory=LearnConfig)


SECTIONS = {"room": RoomParams, "hvac": HvacParams, "grid": GridConfig, "comfort": ComfortConfig,
            "price": PriceConfig, "weather": WeatherConfig, "sim": SimConfig, "learn": LearnConfig}

CASE_GRIDS = {
    1: dict(flow_levels=3, set_temps=(12.0, 14.0, 16.0)),
    2: dict(flow_levels=5, set_temps=(15.0,)),
    3: dict(flow_levels=5, set_temps=(15.0,), t_out=(22.0, 34.0, 1.0), rh_out=(0.40, 1.00, 0.05),
            t_in=(18.0, 32.0, 1.0), rh_in=(0.30, 1.00, 0.05)),
}
CASE_PATHS = {1: 1000, 2: 2000, 3: 5000}


def preset(case: int, seed: int = 0) -> ExperimentConfig:
    if case not in CASE_GRIDS:
        raise ConfigError(f"unknown case {case}; choose 1, 2 or 3")
    cfg = ExperimentConfig(case=case, seed=seed)
    return dataclasses.replace(cfg, grid=dataclasses.replace(cfg.grid, **CASE_GRIDS[case]),
                               learn=dataclasses.replace(cfg.learn, n_paths=CASE_PATHS[case]))


# -- INI parsing --------------------------------------------------------------

def _parse_value(raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, str):
        return raw
    if isinstance(default, tuple):
        if default and isinstance(default[0], tuple):
            # hour-range schedule: "0-9:0.2, 9-21:0.3"
            out = []
            for item in raw.split(","):
                span, price = item.split(":")
                lo, hi = span.split("-")
                out.append((float(lo), float(hi), float(price)))
            return tuple(out)
        return tuple(float(x) for x in raw.replace(",", " ").split())
    raise ValueError(f"unsupported field type for {raw!r}")


def _format_value(value) -> str:
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{lo:g}-{hi:g}:{p!r}" for lo, hi, p in value)
        return " ".join(repr(float(x)) for x in value)
    return str(value)


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Overlay INI ``text`` onto ``base`` (or the preset named by ``[experiment] case``)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(parser.sections()) - set(SECTIONS) - {"experiment"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    top = dict(parser["experiment"]) if parser.has_section("experiment") else {}
    if set(top) - {"case", "seed"}:
        raise ConfigError(f"unknown keys in [experiment]: {sorted(set(top) - {'case', 'seed'})}")
    try:
        case = int(top.get("case", base.case if base else 2))
        seed = int(top.get("seed", base.seed if base else 0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = base if base is not None else preset(case, seed)
    cfg = dataclasses.replace(cfg, case=case, seed=seed)
    for name, cls in SECTIONS.items():
        if not parser.has_section(name):
            continue
        block = getattr(cfg, name)
        fields = {f.name for f in dataclasses.fields(cls)}
        updates = {}
        for key, raw in parser[name].items():
            if key not in fields:
                raise ConfigError(f"unknown key [{name}] {key}")
            try:
                updates[key] = _parse_value(raw, getattr(block, key))
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: {exc}") from None
        try:
            cfg = dataclasses.replace(cfg, **{name: dataclasses.replace(block, **updates)})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{name}]: {exc}") from None
    validate(cfg)
    return cfg


def load_config(path, case: int | None = None, seed: int | None = None) -> ExperimentConfig:
    """Read an INI file; ``case`` picks the preset underneath, ``seed`` overrides the file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    base = None
    if case is not None:
        base = preset(case)
    cfg = parse_config(text, base)
    if case is not None and cfg.case != case:
        cfg = dataclasses.replace(cfg, case=case)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    lines = ["[experiment]", f"case = {cfg.case}", f"seed = {cfg.seed}", ""]
    for name in SECTIONS:
        lines.append(f"[{name}]")
        block = getattr(cfg, name)
        for f in dataclasses.fields(block):
            lines.append(f"{f.name} = {_format_value(getattr(block, f.name))}")
        lines.append("")
    return "\n".join(lines)


def validate(cfg: ExperimentConfig):
    g = cfg.grid
    for name in ("t_out", "rh_out", "t_in", "rh_in"):
        if len(getattr(g, name)) != 3:
            raise ConfigError(f"[grid] {name} needs lo hi step")
    if g.occ_levels < 1 or g.flow_levels < 1 or not g.set_temps:
        raise ConfigError("[grid] needs at least one level per component")
    lo, hi = cfg.hvac.fcu_temp_bounds
    if any(not lo <= x <= hi for x in g.set_temps):
        raise ConfigError("[grid] set_temps outside the supply-temperature bounds")
    s = cfg.sim
    if s.n_stages < 2 or s.start_stage < 0 or s.start_stage + s.n_stages > N_STAGES:
        raise ConfigError("[sim] horizon must fit within one day")
    if cfg.learn.n_paths < 1 or not cfg.learn.epsilon > 0:
        raise ConfigError("[learn] needs n_paths >= 1 and epsilon > 0")
    try:
        ComfortBand(cfg.comfort.pmv_low, cfg.comfort.pmv_high)
        cfg.price.at_hours(np.arange(48) * 0.5)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# -- environment assembly -----------------------------------------------------

def grids(cfg: ExperimentConfig) -> dict[str, LevelGrid]:
    return {name: LevelGrid(*getattr(cfg.grid, name)) for name in ("t_out", "rh_out", "t_in", "rh_in")}


def load_weather(cfg: ExperimentConfig):
    w = cfg.weather
    if w.csv:
        return read_weather_csv(w.csv)
    return synth_weather(WeatherProfile(solar_peak=w.solar_peak), w.synth_days, w.synth_seed)


def build_env(cfg: ExperimentConfig, weather=None, chains: MarkovChainSet | None = None,
              solar=None) -> HvacMdp:
    """Assemble the simulator MDP: chains from weather (or a chain file), Strategy I windows,
    per-stage prices and solar gains, initial room state."""
    validate(cfg)
    gr = grids(cfg)
    day_stages = N_STAGES
    if chains is None and cfg.weather.chains:
        chains, saved, solar = load_chains(cfg.weather.chains)
        for name, grid in saved.items():
            if name in gr and grid != gr[name]:
                from .markov import GridMismatch
                raise GridMismatch(f"chain file grid {name} differs from the configuration")
    windows = None
    temps = hums = None
    if chains is None or cfg.grid.window_margin >= 0:
        weather = weather if weather is not None else load_weather(cfg)
        temps, hums, data_solar = discretize_weather(weather, gr["t_out"], gr["rh_out"], day_stages)
        if solar is None:
            solar = data_solar
    if chains is None:
        chains = estimate_chains(weather, gr["t_out"], gr["rh_out"], occ_levels=cfg.grid.occ_levels,
                                 n_stages=day_stages)
    if cfg.grid.window_margin >= 0 and temps is not None:
        windows = windows_from_levels(temps, hums, gr["t_out"].count, gr["rh_out"].count, cfg.grid.window_margin)
    if solar is None:
        solar = solar_profile((np.arange(day_stages) + 0.5) * 24.0 / day_stages,
                              WeatherProfile(solar_peak=cfg.weather.solar_peak))

    t0, T = cfg.sim.start_stage, cfg.sim.n_stages
    sl = slice(t0, t0 + T - 1)
    chains = MarkovChainSet(chains.temp[sl], chains.humid[sl], chains.occ[sl])
    hours = (np.arange(day_stages) + 0.5) * 24.0 / day_stages
    price = cfg.price.at_hours(hours)[t0:t0 + T]
    solar = np.asarray(solar, dtype=float)[t0:t0 + T]
    if windows is not None:
        windows = windows[t0:t0 + T]

    states = StateSpace(gr["t_out"], gr["rh_out"], gr["t_in"], gr["rh_in"], cfg.grid.occ_levels,
                        cfg.grid.max_occupants, windows)
    actions = ActionSpace.grid(cfg.hvac, cfg.grid.flow_levels, cfg.grid.set_temps)
    if temps is not None:
        # start from the most common outdoor levels at the first stage
        init = (int(np.bincount(temps[:, t0]).argmax()), int(np.bincount(hums[:, t0]).argmax()), 0)
    else:
        init = (gr["t_out"].count // 2, gr["rh_out"].count // 2, 0)
    c = cfg.comfort
    s = cfg.sim
    return HvacMdp(
        room=cfg.room, hvac=cfg.hvac, states=states, actions=actions, chains=chains, price=price, solar=solar,
        band=ComfortBand(c.pmv_low, c.pmv_high),
        pmv_settings=PmvSettings(c.metabolic_rate, c.mechanical_work, c.air_velocity, c.clothing),
        device_heat=s.device_heat, dt=s.dt,
        initial_state=ContinuousState(s.t_indoor, s.rh_indoor, s.t_wall, s.t_wall),
        initial_levels=init,
        init_temp_band=c.init_temp_band if c.strategy_two else None,
        init_rh_band=c.init_rh_band if c.strategy_two else None,
        penalty=s.penalty)


def tiny_config(seed: int = 0) -> ExperimentConfig:
    """Enumerable instance: 3 x 3 outdoor levels, 3 x 3 indoor levels, 2 occupancy levels,
    8 midday stages and 9 actions (3 flows per unit at a fixed supply temperature)."""
    cfg = preset(2, seed)
    grid = dataclasses.replace(cfg.grid, t_out=(28.0, 34.0, 2.0), rh_out=(0.40, 0.70, 0.10),
                               t_in=(21.0, 27.0, 2.0), rh_in=(0.40, 0.70, 0.10), occ_levels=2,
                               window_margin=-1, flow_levels=3)
    sim = dataclasses.replace(cfg.sim, n_stages=8, start_stage=20)
    return dataclasses.replace(cfg, grid=grid, sim=sim)
