"""Independent scalar reference implementations used as test oracles.

Written from the textbook equations with the math module only, so they share no
code with the package.
"""

from __future__ import annotations

import math
from itertools import product

from scipy.optimize import brentq


def iso_vapor_pressure(t_air: float, rh: float) -> float:
    """Water vapour partial pressure in Pa, using the ISO 7730 saturation fit."""
    return rh * 1000.0 * math.exp(16.6536 - 4030.183 / (t_air + 235.0))


def fanger_pmv(t_air, t_rad, vel, rh, met, clo, wme=0.0):
    """Fanger PMV with the clothing temperature solved as a scalar root."""
    m = met * 58.15
    mw = m - wme
    icl = 0.155 * clo
    pa = iso_vapor_pressure(t_air, rh)
    fcl = 1.0 + 1.29 * icl if icl <= 0.078 else 1.05 + 0.645 * icl
    hc_forced = 12.1 * math.sqrt(vel)

    def hc(tcl):
        return max(hc_forced, 2.38 * abs(tcl - t_air) ** 0.25)

    def residual(tcl):
        rad = 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (t_rad + 273.0) ** 4)
        conv = fcl * hc(tcl) * (tcl - t_air)
        return tcl - (35.7 - 0.028 * mw - icl * (rad + conv))

    tcl = brentq(residual, -20.0, 60.0, xtol=1e-12)
    load = (mw
            - 3.05e-3 * (5733.0 - 6.99 * mw - pa)
            - 0.42 * (mw - 58.15)
            - 1.7e-5 * m * (5867.0 - pa)
            - 0.0014 * m * (34.0 - t_air)
            - 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (t_rad + 273.0) ** 4)
            - fcl * hc(tcl) * (tcl - t_air))
    return (0.303 * math.exp(-0.036 * m) + 0.028) * load


# Published PMV reference cases: (t_air, t_rad, v, rh, met, clo, pmv)
ISO_CASES = [
    (22.0, 22.0, 0.1, 0.60, 1.2, 0.5, -0.75),
    (27.0, 27.0, 0.1, 0.60, 1.2, 0.5, 0.77),
    (27.0, 27.0, 0.3, 0.60, 1.2, 0.5, 0.44),
    (23.5, 25.5, 0.1, 0.60, 1.2, 0.5, -0.01),
    (23.5, 25.5, 0.3, 0.60, 1.2, 0.5, -0.55),
    (19.0, 19.0, 0.1, 0.40, 1.2, 1.0, -0.60),
    (23.5, 23.5, 0.3, 0.40, 1.2, 1.0, 0.12),
    (22.0, 22.0, 0.1, 0.60, 1.6, 0.5, 0.05),
    (27.0, 27.0, 0.1, 0.60, 1.6, 0.5, 1.17),
    (27.0, 27.0, 0.3, 0.60, 1.6, 0.5, 0.95),
]


# -- room model ---------------------------------------------------------------

P_ATM = 1.01e5


def _p_sat(t):
    return 611.2 * math.exp(17.62 * t / (243.12 + t))


def _w(t, rh):
    pw = rh * _p_sat(t)
    return 0.621945 * pw / (P_ATM - pw)


def _rh(t, w):
    return P_ATM * w / (0.621945 + w) / _p_sat(t)


def room_step(ta, rh, twl, twr, to, rho, n, solar, qdev, g_fau, t_fau, g_fcu, t_fcu, p, dt=1800.0):
    """One forward-difference step of the room model; ``p`` is a dict of room constants."""
    q = (n * p["q_occ"] + n * qdev
         + p["h_g"] * p["a_g"] * (to - ta)
         + p["h_w"] * p["a_wl"] * (twl - ta)
         + p["h_w"] * p["a_wr"] * (twr - ta)
         + p["cp"] * g_fau * (t_fau - ta)
         + p["cp"] * g_fcu * (t_fcu - ta))
    ta1 = ta + dt * q / (p["cp"] * p["m_a"])
    twl1 = twl + dt * p["h_w"] * p["a_wl"] * (ta - twl) / (p["c_w"] * p["m_wl"])
    twr1 = twr + dt * (p["h_w"] * p["a_wr"] * (ta - twr) + p["alpha"] * p["a_wr"] * solar) / (p["c_w"] * p["m_wr"])
    w_in = _w(ta, rh)
    w_fau = min(_w(to, rho), _w(t_fau, 1.0))
    w_fcu = min(w_in, _w(t_fcu, 1.0))
    w1 = max(w_in + dt * (n * p["h_gen"] + g_fau * (w_fau - w_in) + g_fcu * (w_fcu - w_in)) / p["m_a"], 0.0)
    return ta1, min(_rh(ta1, w1), 1.0), twl1, twr1


def coil_loads(ta, rh, to, rho, g_fau, t_fau, g_fcu, t_fcu, cp=1012.0):
    """Sensible plus latent coil loads in kW, cooling only."""
    w_in, w_out = _w(ta, rh), _w(to, rho)
    w_fau = min(w_out, _w(t_fau, 1.0))
    w_fcu = min(w_in, _w(t_fcu, 1.0))
    fcu = cp * g_fcu * (ta - t_fcu) / 1000.0 + g_fcu * (w_in * (2500 + 1.84 * ta) - w_fcu * (2500 + 1.84 * t_fcu))
    fau = cp * g_fau * (to - t_fau) / 1000.0 + g_fau * (w_out * (2500 + 1.84 * to) - w_fau * (2500 + 1.84 * t_fau))
    return max(fcu, 0.0), max(fau, 0.0)


# -- exhaustive search ---------------------------------------------------------

def enumerate_deterministic_mdp(cost, nxt, initial_state):
    """Cheapest action sequence through a deterministic MDP, by listing every sequence.

    ``cost[t][s][a]`` and ``nxt[t][s][a]`` are nested lists.
    """
    T, A = len(cost), len(cost[0][0])
    best = math.inf
    for seq in product(range(A), repeat=T):
        s, total = initial_state, 0.0
        for t, a in enumerate(seq):
            total += cost[t][s][a]
            if t < T - 1:
                s = nxt[t][s][a]
        best = min(best, total)
    return best
