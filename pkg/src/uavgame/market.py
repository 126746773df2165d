"""Logit market share, energy dissipation and operator utility."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .config import EnergyParams, GameConfig, StrategyProfile, TimingConfig, check_probability, check_profile
from .coverage import resolve_coverage
from .temporal import service_probability


def logit_share(own_fee, rival_fee, temperature):
    """Market share ``exp(-f_i/mu) / (exp(-f_i/mu) + exp(-f_j/mu))``."""
    x = (np.asarray(rival_fee, dtype=float) - np.asarray(own_fee, dtype=float)) / temperature
    out = expit(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ServedSet:
    """Transmission probabilities of the ground devices within reach of a UAV."""

    tx_probs: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tx_probs", tuple(float(p) for p in self.tx_probs))
        for p in self.tx_probs:
            check_probability(p, "tx_prob")

    def __len__(self):
        return len(self.tx_probs)

    @classmethod
    def uniform(cls, n, p):
        return cls((p,) * n)

    def busy_prob(self) -> float:
        """Probability at least one device transmits, ``1 - prod(1 - p_u)``."""
        return -math.expm1(sum(math.log1p(-p) if p < 1 else -math.inf for p in self.tx_probs))


def normalized_throughput(served: ServedSet, u: int) -> float:
    """``p_u * prod_{k != u} (1 - p_k)``: chance device ``u`` transmits alone."""
    probs = served.tx_probs
    if not 0 <= u < len(probs):
        raise IndexError(f"user index {u} out of range for {len(probs)} users")
    out = probs[u]
    for k, p in enumerate(probs):
        if k != u:
            out *= 1.0 - p
    return out


def activity_cost(served: ServedSet, params: EnergyParams) -> float:
    """Receive-plus-acknowledge energy per successful contact."""
    acks = sum(normalized_throughput(served, u) for u in range(len(served)))
    return served.busy_prob() * params.rx_cost + acks * params.ack_cost


def _beacon_energy(params: EnergyParams, tau, timing: TimingConfig, share):
    if params.beacon_term == "literal_share":
        return params.beacon_cost * share
    return params.beacon_cost * (np.asarray(tau, dtype=float) / timing.slot_period)


def energy(served: ServedSet, params: EnergyParams, p_srv, tau, timing: TimingConfig, share):
    """Energy dissipated by one UAV over the window.

    The beaconing term is ``beacon_cost * tau / T`` by default; with
    ``beacon_term="literal_share"`` it is ``beacon_cost * share`` instead.
    """
    out = activity_cost(served, params) * np.asarray(p_srv, dtype=float) \
        + _beacon_energy(params, tau, timing, share) + params.switch_cost
    return float(out) if np.ndim(out) == 0 else out


def served_set_for(config: GameConfig) -> ServedSet:
    return ServedSet(config.market.user_tx_probs)


class Payoff:
    """Vectorised utility of one operator as a function of both strategies.

    Constants that do not depend on the strategies (coverage, activity cost)
    are resolved once at construction.
    """

    def __init__(self, config: GameConfig, who: int, served: ServedSet | None = None):
        if who not in (0, 1):
            raise IndexError(f"operator index must be 0 or 1, got {who}")
        self.config = config
        self.who = who
        me, rival = config.uav[who], config.uav[1 - who]
        self.lam_i = me.encounter_rate
        self.lam_j = rival.encounter_rate
        self.p_cov = resolve_coverage(me)
        self.energy_params = me.energy
        self.served = served if served is not None else served_set_for(config)
        self.psi = activity_cost(self.served, me.energy)
        self.population = config.market.population_size
        self.temperature = config.market.temperature

    def service(self, tau_i, tau_j):
        return service_probability(tau_i, tau_j, self.lam_i, self.lam_j, self.config.timing, self.p_cov)

    def share(self, f_i, f_j):
        return logit_share(f_i, f_j, self.temperature)

    def __call__(self, tau_i, f_i, tau_j, f_j):
        p_srv = self.service(tau_i, tau_j)
        share = self.share(f_i, f_j)
        revenue = share * self.population * p_srv * f_i
        e = self.energy_params
        cost = self.psi * p_srv + _beacon_energy(e, tau_i, self.config.timing, share) + e.switch_cost
        return revenue - cost


def utility(profile: StrategyProfile, config: GameConfig, who: int) -> float:
    """Utility of operator ``who``: ``pi_i * N * P_srv * f_i - E_i``."""
    profile = check_profile(profile, config)
    payoff = Payoff(config, who)
    me, rival = profile[who], profile[1 - who]
    return float(payoff(me.beacon_duration, me.fee, rival.beacon_duration, rival.fee))
