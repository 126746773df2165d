"""Beaconing, sleep, first-encounter and service probabilities.

The UAV beacons during ``[sT, sT + tau]`` of every slot ``s = 0..l-1`` and its
first contact with the ground destination is exponential with rate ``lambda``.
All functions broadcast over numpy arrays; scalar inputs give ``float``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import GameConfig, StrategyProfile, TimingConfig, check_profile
from .exceptions import DomainError

#: below this value of ``lambda * T`` the slot ratios use their series expansion
SMALL_RATE = 1e-8


class Order(str, Enum):
    I_FIRST = "i_first"
    J_FIRST = "j_first"


@dataclass(frozen=True)
class EncounterPair:
    lambda_i: float
    lambda_j: float
    window: float

    def __post_init__(self):
        if not (self.lambda_i > 0 and self.lambda_j > 0 and self.window > 0):
            raise DomainError(f"encounter rates and window must be positive, got {self}")

    @classmethod
    def unchecked(cls, lambda_i, lambda_j, window):
        """Build a pair without validation (degenerate windows in test fixtures)."""
        pair = object.__new__(cls)
        object.__setattr__(pair, "lambda_i", lambda_i)
        object.__setattr__(pair, "lambda_j", lambda_j)
        object.__setattr__(pair, "window", window)
        return pair


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_inputs(lam, tau, timing):
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError(f"encounter rate must be > 0, got {lam}")
    T = timing.slot_period
    if np.any(~((tau >= 0) & (tau <= T))):
        raise DomainError(f"beacon_duration outside [0, {T}]: {tau}")
    return lam, tau


def _window_hit(lam, timing):
    """P(first encounter <= m) = 1 - exp(-lambda m)."""
    return -np.expm1(-lam * timing.window)


def _on_fraction(lam, tau, T):
    """(1 - e^{-lam tau}) / (1 - e^{-lam T}), series branch for tiny lam*T."""
    x = lam * T
    small = x < SMALL_RATE
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = np.expm1(-lam * tau) / np.expm1(-x)
    series = (tau / T) * (1.0 + 0.5 * lam * (T - tau))
    return np.where(small, series, exact)


def _off_fraction(lam, tau, T):
    """(e^{-lam tau} - e^{-lam T}) / (1 - e^{-lam T})."""
    x = lam * T
    small = x < SMALL_RATE
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = np.exp(-lam * tau) * np.expm1(-lam * (T - tau)) / np.expm1(-x)
    series = ((T - tau) / T) * (1.0 - 0.5 * lam * tau)
    return np.where(small, series, exact)


def beacon_prob(lam, tau, timing: TimingConfig):
    """Probability the first encounter within ``[0, m]`` falls in a beaconing interval.

    Equals ``(1 - e^{-lam tau}) (1 - e^{-lam m}) / (1 - e^{-lam T})``.
    """
    lam, tau = _check_inputs(lam, tau, timing)
    return _out(_on_fraction(lam, tau, timing.slot_period) * _window_hit(lam, timing))


def sleep_prob(lam, tau, timing: TimingConfig):
    """Probability the first encounter within ``[0, m]`` falls while the radio sleeps."""
    lam, tau = _check_inputs(lam, tau, timing)
    return _out(_off_fraction(lam, tau, timing.slot_period) * _window_hit(lam, timing))


def first_encounter_prob(pair: EncounterPair, order=Order.I_FIRST):
    """P(T_i <= T_j <= m) for ``i_first``, P(T_j <= T_i <= m) for ``j_first``.

    Both operators' contact times are exponential; neither operator's on/off
    state is accounted for here.
    """
    order = Order(order)
    li, lj, m = pair.lambda_i, pair.lambda_j, pair.window
    if order is Order.J_FIRST:
        li, lj = lj, li
    li = np.asarray(li, dtype=float)
    lj = np.asarray(lj, dtype=float)
    s = li + lj
    # lambda_i/S (1 - e^{-S m}) - e^{-lambda_j m} (1 - e^{-lambda_i m})
    value = -(li / s) * np.expm1(-s * m) + np.exp(-lj * m) * np.expm1(-li * m)
    return _out(np.clip(value, 0.0, 1.0))


def _race(li, lj, m):
    s = li + lj
    i_first = -(li / s) * np.expm1(-s * m) + np.exp(-lj * m) * np.expm1(-li * m)
    j_first = -(lj / s) * np.expm1(-s * m) + np.exp(-li * m) * np.expm1(-lj * m)
    return i_first, j_first


def service_probability(tau_i, tau_j, lam_i, lam_j, timing: TimingConfig, p_cov):
    """Array form of the successful-contact probability for operator ``i``.

    ``[P(T_i <= T_j) + P(T_i >= T_j) * P_j^slp] * P_i^bcn * P_i^cov``.
    No range checks; callers validate strategies first.
    """
    T, m = timing.slot_period, timing.window
    i_first, j_first = _race(lam_i, lam_j, m)
    slp_j = _off_fraction(lam_j, tau_j, T) * -np.expm1(-lam_j * m)
    bcn_i = _on_fraction(lam_i, tau_i, T) * -np.expm1(-lam_i * m)
    return (i_first + j_first * slp_j) * bcn_i * p_cov


def service_prob(profile: StrategyProfile, config: GameConfig, who: int):
    """Successful-contact probability of operator ``who`` (0 or 1) under ``profile``."""
    from .coverage import resolve_coverage

    profile = check_profile(profile, config)
    if who not in (0, 1):
        raise IndexError(f"operator index must be 0 or 1, got {who}")
    other = 1 - who
    ui, uj = config.uav[who], config.uav[other]
    return float(
        service_probability(
            profile[who].beacon_duration,
            profile[other].beacon_duration,
            ui.encounter_rate,
            uj.encounter_rate,
            config.timing,
            resolve_coverage(ui),
        )
    )
