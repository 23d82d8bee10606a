"""Moist-air helpers shared by the room model and the comfort index."""

from __future__ import annotations

import numpy as np

ATM_PRESSURE = 1.01e5  # Pa
EPSILON = 0.621945  # ratio of molar masses, water / dry air


def saturation_pressure(t_c):
    """Saturation vapour pressure [Pa] over water, Magnus form (Sonntag coefficients)."""
    t_c = np.asarray(t_c, dtype=float)
    return 611.2 * np.exp(17.62 * t_c / (243.12 + t_c))


def vapor_pressure(t_c, rh):
    return np.asarray(rh, dtype=float) * saturation_pressure(t_c)


def humidity_ratio(t_c, rh, pressure=ATM_PRESSURE):
    """kg water per kg dry air from temperature [C] and relative humidity [0-1]."""
    pw = vapor_pressure(t_c, rh)
    return EPSILON * pw / (pressure - pw)


def relative_humidity(t_c, w, pressure=ATM_PRESSURE):
    """Inverse of :func:`humidity_ratio`."""
    w = np.asarray(w, dtype=float)
    pw = pressure * w / (EPSILON + w)
    return pw / saturation_pressure(t_c)
