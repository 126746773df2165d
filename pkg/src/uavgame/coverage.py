"""Coverage probability of a ground user placed uniformly on the disc.

Only the line-of-sight term is integrated; the UAV sits above the disc centre
and the user density in the radial coordinate is ``2 r / R^2``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .config import ComputedCoverage, ConstantLos, DirectCoverage, ElevationSigmoidLos, RadioParams, UavParams
from .quadrature import adaptive_simpson

ABS_TOL = 1e-10
MAX_SUBDIVISIONS = 2**18


def snr_radius(radio: RadioParams) -> float:
    """Largest radius at which the SNR still clears the threshold, capped at the cell radius."""
    ratio = radio.tx_power / (radio.sinr_threshold * radio.noise_power)
    return min(ratio ** (1.0 / radio.pathloss_exponent), radio.cell_radius)


def elevation_deg(r, altitude):
    r = np.asarray(r, dtype=float)
    # arctan2 gives exactly 90 degrees at r = 0
    return np.degrees(np.arctan2(altitude, r))


def los_probability(model, r, altitude):
    """LoS probability at ground distance ``r`` from the point below the UAV.

    ``ElevationSigmoidLos`` uses ``1 / (1 + a exp(-b (theta - a)))`` with the
    elevation angle ``theta`` in degrees.
    """
    if isinstance(model, ConstantLos):
        out = np.full(np.shape(r), model.p, dtype=float)
    elif isinstance(model, ElevationSigmoidLos):
        theta = elevation_deg(r, altitude)
        with np.errstate(over="ignore"):
            out = 1.0 / (1.0 + model.a * np.exp(-model.b * (theta - model.a)))
    else:
        raise TypeError(f"unknown LoS model {model!r}")
    return float(out) if np.ndim(out) == 0 else out


def coverage_prob(radio: RadioParams, abs_tol=ABS_TOL, max_subdivisions=MAX_SUBDIVISIONS) -> float:
    """Average LoS coverage probability over the disc of radius ``cell_radius``."""
    r_max = snr_radius(radio)
    R2 = radio.cell_radius**2
    model = radio.los_model
    if isinstance(model, ConstantLos):
        def p_los(r):
            return model.p
    else:
        a, b, h = model.a, model.b, radio.altitude

        def p_los(r):
            z = -b * (math.degrees(math.atan2(h, r)) - a)
            return 1.0 / (1.0 + a * math.exp(z)) if z < 700.0 else 0.0

    value = adaptive_simpson(lambda r: p_los(r) * 2.0 * r / R2, 0.0, r_max,
                             abs_tol=abs_tol, max_subdivisions=max_subdivisions)
    return min(max(value, 0.0), 1.0)


@lru_cache(maxsize=256)
def _cached_coverage(radio: RadioParams) -> float:
    return coverage_prob(radio)


def resolve_coverage(uav: UavParams) -> float:
    """Coverage probability of an operator, computing it from radio params if needed."""
    cov = uav.coverage
    if isinstance(cov, DirectCoverage):
        return cov.p_cov
    if isinstance(cov, ComputedCoverage):
        return _cached_coverage(cov.radio)
    raise TypeError(f"unknown coverage spec {cov!r}")
