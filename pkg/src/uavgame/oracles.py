"""Independent reference values for the closed-form model quantities.

Nothing here shares code with the production formulas: the temporal
probabilities are integrated from the exponential contact-time densities
with composite Gauss-Legendre rules, and coverage uses a dense trapezoid
grid. Used by ``probe --oracle`` and by the test-suite.
"""

from __future__ import annotations

import math

import numpy as np

from .config import ConstantLos, RadioParams
from .coverage import los_probability, snr_radius
from .quadrature import trapezoid_grid

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(32)
# beyond this many mean contact times the exponential tail is below 1e-17
_TAIL = 40.0


def _gl_intervals(func, lo, hi):
    """Sum of Gauss-Legendre integrals over the intervals ``[lo[k], hi[k]]``."""
    lo = np.asarray(lo, dtype=float)[:, None]
    hi = np.asarray(hi, dtype=float)[:, None]
    x = 0.5 * (hi - lo) * _NODES[None, :] + 0.5 * (hi + lo)
    return float(np.sum(0.5 * (hi - lo) * _WEIGHTS[None, :] * func(x)))


def _gl(func, a, b, panels=1):
    edges = np.linspace(a, b, panels + 1)
    return _gl_intervals(func, edges[:-1], edges[1:])


def _density(lam):
    return lambda t: lam * np.exp(-lam * t)


def _slot_starts(lam, slot_period, num_slots):
    s = np.arange(num_slots) * slot_period
    # slots starting beyond the tail carry no mass worth adding
    return s[lam * s <= _TAIL + 10]


def beacon_prob(lam, tau, slot_period, num_slots):
    """Sum over slots of the contact density integrated over each on-interval."""
    if tau <= 0:
        return 0.0
    s = _slot_starts(lam, slot_period, num_slots)
    return _gl_intervals(_density(lam), s, s + tau)


def sleep_prob(lam, tau, slot_period, num_slots):
    if tau >= slot_period:
        return 0.0
    s = _slot_starts(lam, slot_period, num_slots)
    return _gl_intervals(_density(lam), s + tau, s + slot_period)


def race_prob(lam_i, lam_j, window, panels=12):
    """P(T_i <= T_j <= m) as a double integral over the triangle ``0 <= x <= y <= m``.

    Outer panels are refined near the origin on the scale of both rates so
    that very unequal rates are still resolved.
    """
    y_hi = min(window, _TAIL / lam_j)
    x_scale = min(y_hi, _TAIL / lam_i)
    edges = np.unique(np.concatenate([np.linspace(0.0, y_hi, panels + 1), np.linspace(0.0, x_scale, 5)]))
    lo, hi = edges[:-1, None], edges[1:, None]
    ys = (0.5 * (hi - lo) * _NODES[None, :] + 0.5 * (hi + lo)).ravel()
    wy = (0.5 * (hi - lo) * _WEIGHTS[None, :]).ravel()
    # inner integral over x in [0, min(y, tail)] on 2 panels per outer node
    x_hi = np.minimum(ys, _TAIL / lam_i)
    frac = np.linspace(0.0, 1.0, 3)
    a = x_hi[:, None] * frac[None, :-1]
    b = x_hi[:, None] * frac[None, 1:]
    xs = 0.5 * (b - a)[..., None] * _NODES + 0.5 * (b + a)[..., None]
    inner = np.sum(0.5 * (b - a)[..., None] * _WEIGHTS * lam_i * np.exp(-lam_i * xs), axis=(1, 2))
    return float(np.sum(wy * lam_j * np.exp(-lam_j * ys) * inner))


def coverage_prob(radio: RadioParams, n=1_000_000):
    r_max = snr_radius(radio)
    R2 = radio.cell_radius**2

    def integrand(r):
        return los_probability(radio.los_model, r, radio.altitude) * 2.0 * r / R2

    return trapezoid_grid(integrand, 0.0, r_max, n)


def constant_los_coverage(p, snr_radius_ratio):
    """Closed area-ratio value for a constant LoS probability."""
    return p * snr_radius_ratio**2


def share(f_i, f_j, mu):
    a, b = math.exp(-f_i / mu), math.exp(-f_j / mu)
    return a / (a + b)


def service_prob(tau_i, tau_j, lam_i, lam_j, slot_period, num_slots, p_cov):
    m = slot_period * num_slots
    i_first = race_prob(lam_i, lam_j, m)
    j_first = race_prob(lam_j, lam_i, m)
    return (i_first + j_first * sleep_prob(lam_j, tau_j, slot_period, num_slots)) \
        * beacon_prob(lam_i, tau_i, slot_period, num_slots) * p_cov


def psi(tx_probs, rx_cost, ack_cost):
    busy = 1.0 - float(np.prod([1.0 - p for p in tx_probs])) if tx_probs else 0.0
    acks = 0.0
    for u, p in enumerate(tx_probs):
        acks += p * float(np.prod([1.0 - q for k, q in enumerate(tx_probs) if k != u]))
    return busy * rx_cost + acks * ack_cost


def energy(p_srv, tau, slot_period, share_i, params, tx_probs):
    beacon = params.beacon_cost * (share_i if params.beacon_term == "literal_share" else tau / slot_period)
    return psi(tx_probs, params.rx_cost, params.ack_cost) * p_srv + beacon + params.switch_cost


def utility(profile, config, who):
    me, rival = profile[who], profile[1 - who]
    from .coverage import resolve_coverage

    u_i, u_j = config.uav[who], config.uav[1 - who]
    t = config.timing
    p = service_prob(me.beacon_duration, rival.beacon_duration, u_i.encounter_rate, u_j.encounter_rate,
                     t.slot_period, t.num_slots, resolve_coverage(u_i))
    s = share(me.fee, rival.fee, config.market.temperature)
    e = energy(p, me.beacon_duration, t.slot_period, s, u_i.energy, config.market.user_tx_probs)
    return s * config.market.population_size * p * me.fee - e


__all__ = ["beacon_prob", "sleep_prob", "race_prob", "coverage_prob", "constant_los_coverage", "share",
           "service_prob", "psi", "energy", "utility", "ConstantLos"]
