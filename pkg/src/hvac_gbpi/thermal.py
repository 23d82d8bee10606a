"""Gray-box room model: air, two walls and moisture, one explicit step per decision interval.

Every function broadcasts over numpy arrays, so the same code advances a single
room or a whole batch of simulated days at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .psychro import ATM_PRESSURE, humidity_ratio, relative_humidity

DT = 1800.0  # s
LATENT_HEAT = 2500.0  # kJ/kg, vapour enthalpy at 0 C
VAPOR_CP = 1.84  # kJ/(kg K)


class SimulationError(ValueError):
    """Raised when a step produces non-finite values (parameters outside the stable range)."""


@dataclass(frozen=True)
class RoomParams:
    cp_air: float = 1012.0
    m_air: float = 144.6
    m_wall_left: float = 7.2e3
    m_wall_right: float = 8.64e3
    c_wall: float = 1.05e3
    h_glass: float = 2.5
    a_glass: float = 10.0
    h_wall: float = 0.8
    a_wall_left: float = 20.0
    a_wall_right: float = 24.0
    alpha_wall: float = 0.4
    q_occupant: float = 40.0  # W per person
    h_gen: float = 3.0e-5  # kg/s moisture per person

    def __post_init__(self):
        positive = ("cp_air", "m_air", "m_wall_left", "m_wall_right", "c_wall",
                    "h_glass", "a_glass", "h_wall", "a_wall_left", "a_wall_right")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.alpha_wall <= 1.0:
            raise ValueError("alpha_wall must lie in [0, 1]")
        if self.q_occupant < 0 or self.h_gen < 0:
            raise ValueError("occupant gains must be non-negative")


@dataclass(frozen=True)
class HvacParams:
    fau_flow_bounds: tuple[float, float] = (0.0, 0.02)
    fcu_flow_bounds: tuple[float, float] = (0.0, 0.1)
    fau_temp_bounds: tuple[float, float] = (12.0, 16.0)
    fcu_temp_bounds: tuple[float, float] = (12.0, 16.0)
    fau_rated_flow: float = 0.01
    fcu_rated_flow: float = 0.05
    fau_rated_fan_power: float = 0.1  # kW
    fcu_rated_fan_power: float = 0.1  # kW
    eta: float = 1.0 / 2.7
    fau_supply_humidity_saturation: float = 1.0
    pressure: float = ATM_PRESSURE

    def __post_init__(self):
        for name in ("fau_flow_bounds", "fcu_flow_bounds", "fau_temp_bounds", "fcu_temp_bounds"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must be ordered (low <= high)")
        for name in ("fau_rated_flow", "fcu_rated_flow", "fau_rated_fan_power",
                     "fcu_rated_fan_power", "eta", "pressure"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.fau_supply_humidity_saturation <= 1.0:
            raise ValueError("fau_supply_humidity_saturation must lie in (0, 1]")

    def within_bounds(self, u: ControlInput) -> np.ndarray:
        ok = np.ones(np.shape(u.g_fau), dtype=bool)
        for value, (lo, hi) in ((u.g_fau, self.fau_flow_bounds), (u.g_fcu, self.fcu_flow_bounds),
                                (u.t_fau, self.fau_temp_bounds), (u.t_fcu, self.fcu_temp_bounds)):
            value = np.asarray(value)
            ok &= (value >= lo - 1e-12) & (value <= hi + 1e-12)
        return ok


@dataclass(frozen=True)
class ContinuousState:
    """Room state; fields may be floats or equally shaped arrays. rh is a fraction."""

    t_indoor: float | np.ndarray
    rh_indoor: float | np.ndarray
    t_wall_left: float | np.ndarray
    t_wall_right: float | np.ndarray


@dataclass(frozen=True)
class ExogenousSample:
    t_outdoor: float | np.ndarray
    rh_outdoor: float | np.ndarray
    occupants: float | np.ndarray
    solar_wall: float | np.ndarray = 0.0  # W/m2
    device_heat_per_occupant: float | np.ndarray = 100.0  # W
    price: float | np.ndarray = 0.0  # currency/kWh


@dataclass(frozen=True)
class ControlInput:
    g_fau: float | np.ndarray
    t_fau: float | np.ndarray
    g_fcu: float | np.ndarray
    t_fcu: float | np.ndarray


@dataclass(frozen=True)
class PowerBreakdown:
    cooling_fcu: float | np.ndarray  # kW thermal
    cooling_fau: float | np.ndarray
    fan_fcu: float | np.ndarray  # kW electric
    fan_fau: float | np.ndarray

    def electric(self, eta: float):
        return eta * (self.cooling_fcu + self.cooling_fau) + self.fan_fcu + self.fan_fau


def supply_humidity_ratios(state: ContinuousState, exo: ExogenousSample, u: ControlInput,
                           hvac: HvacParams):
    """Humidity ratios of the indoor air, outdoor air, FAU supply and FCU supply."""
    p = hvac.pressure
    w_in = humidity_ratio(state.t_indoor, state.rh_indoor, p)
    w_out = humidity_ratio(exo.t_outdoor, exo.rh_outdoor, p)
    w_fau = np.minimum(w_out, humidity_ratio(u.t_fau, hvac.fau_supply_humidity_saturation, p))
    # the coil only removes moisture once return air is above its saturation point
    w_fcu = np.minimum(w_in, humidity_ratio(u.t_fcu, 1.0, p))
    return w_in, w_out, w_fau, w_fcu


def step_dynamics(state: ContinuousState, exo: ExogenousSample, u: ControlInput,
                  room: RoomParams, hvac: HvacParams, dt: float = DT) -> ContinuousState:
    """Advance the room by one forward-difference step of length ``dt`` seconds.

    Moisture is balanced as humidity ratio and converted back to relative
    humidity at the new air temperature; anything above saturation condenses,
    so the returned rh is capped at 1.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    ta = np.asarray(state.t_indoor, dtype=float)
    twl = np.asarray(state.t_wall_left, dtype=float)
    twr = np.asarray(state.t_wall_right, dtype=float)
    n = np.asarray(exo.occupants, dtype=float)

    heat = (n * room.q_occupant
            + n * exo.device_heat_per_occupant
            + room.h_glass * room.a_glass * (exo.t_outdoor - ta)
            + room.h_wall * room.a_wall_left * (twl - ta)
            + room.h_wall * room.a_wall_right * (twr - ta)
            + room.cp_air * u.g_fau * (u.t_fau - ta)
            + room.cp_air * u.g_fcu * (u.t_fcu - ta))
    ta_next = ta + heat * dt / (room.cp_air * room.m_air)

    twl_next = twl + room.h_wall * room.a_wall_left * (ta - twl) * dt / (room.c_wall * room.m_wall_left)
    twr_next = twr + (room.h_wall * room.a_wall_right * (ta - twr)
                      + room.alpha_wall * room.a_wall_right * exo.solar_wall) * dt / (room.c_wall * room.m_wall_right)

    w_in, _, w_fau, w_fcu = supply_humidity_ratios(state, exo, u, hvac)
    moisture = n * room.h_gen + u.g_fau * (w_fau - w_in) + u.g_fcu * (w_fcu - w_in)
    w_next = np.maximum(w_in + moisture * dt / room.m_air, 0.0)
    rh_next = np.minimum(relative_humidity(ta_next, w_next, hvac.pressure), 1.0)

    out = (ta_next, rh_next, twl_next, twr_next)
    if not all(np.all(np.isfinite(x)) for x in out):
        raise SimulationError("non-finite room state after step")
    if np.ndim(ta_next) == 0:
        out = tuple(float(x) for x in out)
    return ContinuousState(*out)


def hvac_power(state: ContinuousState, exo: ExogenousSample, u: ControlInput,
               room: RoomParams, hvac: HvacParams) -> PowerBreakdown:
    """Coil loads (sensible plus latent, kW thermal) and cubic-law fan powers (kW)."""
    ta = np.asarray(state.t_indoor, dtype=float)
    w_in, w_out, w_fau, w_fcu = supply_humidity_ratios(state, exo, u, hvac)
    g_fcu = np.asarray(u.g_fcu, dtype=float)
    g_fau = np.asarray(u.g_fau, dtype=float)

    sens_fcu = room.cp_air * g_fcu * (ta - u.t_fcu) / 1000.0
    lat_fcu = g_fcu * (w_in * (LATENT_HEAT + VAPOR_CP * ta) - w_fcu * (LATENT_HEAT + VAPOR_CP * u.t_fcu))
    sens_fau = room.cp_air * g_fau * (exo.t_outdoor - u.t_fau) / 1000.0
    lat_fau = g_fau * (w_out * (LATENT_HEAT + VAPOR_CP * exo.t_outdoor)
                       - w_fau * (LATENT_HEAT + VAPOR_CP * u.t_fau))

    # cooling mode only
    cooling_fcu = np.maximum(sens_fcu + lat_fcu, 0.0)
    cooling_fau = np.maximum(sens_fau + lat_fau, 0.0)
    fan_fcu = hvac.fcu_rated_fan_power * (g_fcu / hvac.fcu_rated_flow) ** 3
    fan_fau = hvac.fau_rated_fan_power * (g_fau / hvac.fau_rated_flow) ** 3
    parts = (cooling_fcu, cooling_fau, fan_fcu, fan_fau)
    if np.ndim(cooling_fcu) == 0:
        parts = tuple(float(x) for x in parts)
    return PowerBreakdown(*parts)


def energy_cost(power: PowerBreakdown, price, eta: float, dt: float = DT):
    """Currency spent over one interval: price [/kWh] times electric kW times hours."""
    return np.asarray(price) * power.electric(eta) * dt / 3600.0


def stage_cost(state: ContinuousState, exo: ExogenousSample, u: ControlInput,
               room: RoomParams, hvac: HvacParams, dt: float = DT,
               comfortable=None, penalty: float = 0.0):
    """Energy cost of one stage, plus ``penalty`` wherever ``comfortable`` is False."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    cost = energy_cost(hvac_power(state, exo, u, room, hvac), exo.price, hvac.eta, dt)
    if comfortable is not None:
        cost = cost + penalty * (~np.asarray(comfortable, dtype=bool))
    return float(cost) if np.ndim(cost) == 0 else cost
