"""Fanger PMV and comfort-band checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .psychro import ATM_PRESSURE, vapor_pressure

CLO_TO_M2KW = 0.155
MET_TO_WM2 = 58.15
RADIANT_OFFSET = 2.0  # K above air temperature

DAMPING = 0.5
TOLERANCE = 1e-5
MAX_ITERATIONS = 150


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class PmvInputs:
    metabolic_rate: float = 1.0  # met
    mechanical_work: float = 0.0  # W/m2
    t_air: float = 25.0
    rh: float = 0.5
    t_radiant: float = 27.0
    air_velocity: float = 0.2
    clothing_insulation: float = 1.0  # clo
    pressure: float = ATM_PRESSURE  # recorded only; vapour pressure is rh * p_sat(t_air)

    def __post_init__(self):
        if not self.metabolic_rate > 0:
            raise ValueError("metabolic_rate must be positive")
        if self.air_velocity < 0:
            raise ValueError("air_velocity must be non-negative")
        if not 0.0 <= self.rh <= 1.0:
            raise ValueError("rh must be a fraction in [0, 1]")
        if not 10.0 <= self.t_air <= 40.0:
            raise ValueError("t_air outside the supported 10-40 C range")


@dataclass(frozen=True)
class ComfortBand:
    pmv_low: float = -0.5
    pmv_high: float = 0.5

    def __post_init__(self):
        if not self.pmv_low < self.pmv_high:
            raise ValueError("pmv_low must be below pmv_high")


def mean_radiant_temp(t_air):
    return t_air + RADIANT_OFFSET


def pmv(t_air, rh, t_radiant, air_velocity=0.2, met=1.0, clo=1.0, wme=0.0):
    """Vectorised PMV. No range checks; the result is clipped to [-3.5, 3.5].

    The clothing surface temperature is found by damped fixed-point iteration
    on the clothing heat balance.
    """
    ta, rh, tr, vel = np.broadcast_arrays(*(np.asarray(x, dtype=float)
                                            for x in (t_air, rh, t_radiant, air_velocity)))
    m = met * MET_TO_WM2
    mw = m - wme
    icl = clo * CLO_TO_M2KW
    pa = vapor_pressure(ta, rh)
    fcl = 1.05 + 0.645 * icl if icl > 0.078 else 1.0 + 1.29 * icl
    hcf = 12.1 * np.sqrt(vel)
    tra4 = (tr + 273.0) ** 4

    def balance(tcl):
        hc = np.maximum(hcf, 2.38 * np.abs(tcl - ta) ** 0.25)
        rad = 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - tra4)
        return 35.7 - 0.028 * mw - icl * (rad + fcl * hc * (tcl - ta)), hc

    tcl = ta + (35.5 - ta) / (3.5 * icl + 0.1)
    for _ in range(MAX_ITERATIONS):
        target, hc = balance(tcl)
        new = DAMPING * tcl + (1.0 - DAMPING) * target
        done = np.all(np.abs(new - tcl) < TOLERANCE)
        tcl = new
        if done:
            break
    else:
        raise NonConvergence("clothing temperature iteration did not converge")
    hc = np.maximum(hcf, 2.38 * np.abs(tcl - ta) ** 0.25)

    ts = 0.303 * np.exp(-0.036 * m) + 0.028
    loads = (mw
             - 3.05e-3 * (5733.0 - 6.99 * mw - pa)
             - 0.42 * (mw - 58.15)
             - 1.7e-5 * m * (5867.0 - pa)
             - 0.0014 * m * (34.0 - ta)
             - 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - tra4)
             - fcl * hc * (tcl - ta))
    out = np.clip(ts * loads, -3.5, 3.5)
    return float(out) if out.ndim == 0 else out


def compute_pmv(inputs: PmvInputs) -> float:
    return pmv(inputs.t_air, inputs.rh, inputs.t_radiant, inputs.air_velocity,
               inputs.metabolic_rate, inputs.clothing_insulation, inputs.mechanical_work)


def is_comfortable(value, band: ComfortBand = ComfortBand()):
    value = np.asarray(value)
    ok = (value >= band.pmv_low) & (value <= band.pmv_high)
    return bool(ok) if ok.ndim == 0 else ok


def comfort_excess(value, band: ComfortBand = ComfortBand()):
    """Distance of a PMV value from the band; zero inside it."""
    value = np.asarray(value, dtype=float)
    return np.maximum(band.pmv_low - value, 0.0) + np.maximum(value - band.pmv_high, 0.0)
