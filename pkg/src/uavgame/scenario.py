"""Poisson placement of ground devices on the disc around the UAVs.

Randomness comes from numpy's PCG64 bit generator seeded with the given
integer, so positions are reproducible across runs and platforms.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np

from .config import GameConfig, MarketConfig, check_probability
from .exceptions import DomainError
from .market import ServedSet


@dataclass(frozen=True)
class DiscScenario:
    radius: float
    user_density: float
    users: tuple[tuple[float, float], ...]  # (r, phi)
    seed: int

    def __post_init__(self):
        for r, phi in self.users:
            if not 0.0 <= r <= self.radius:
                raise DomainError(f"user radius {r} outside [0, {self.radius}]")
            if not 0.0 <= phi < 2.0 * math.pi:
                raise DomainError(f"user angle {phi} outside [0, 2pi)")

    def __len__(self):
        return len(self.users)

    @property
    def radii(self) -> np.ndarray:
        return np.array([u[0] for u in self.users], dtype=float)

    @property
    def expected_count(self) -> float:
        return self.user_density * math.pi * self.radius**2

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "r", "phi"])
        for k, (r, phi) in enumerate(self.users):
            w.writerow([k, repr(r), repr(phi)])
        return buf.getvalue()


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_ppp(radius: float, density: float, seed: int) -> DiscScenario:
    """Homogeneous PPP on the disc: Poisson count, ``r = R sqrt(U)``, uniform angle."""
    if not radius > 0:
        raise DomainError(f"radius must be > 0, got {radius}")
    if not density >= 0:
        raise DomainError(f"density must be >= 0, got {density}")
    rng = rng_for(seed)
    n = int(rng.poisson(density * math.pi * radius * radius))
    u = rng.random(n)
    phi = rng.random(n) * (2.0 * math.pi)
    r = radius * np.sqrt(u)
    return DiscScenario(float(radius), float(density),
                        tuple((float(a), float(b)) for a, b in zip(r, phi)), int(seed))


def served_set(scenario: DiscScenario, service_radius: float, shared_tx_prob: float) -> ServedSet:
    """Users within ``service_radius`` of the disc centre, all with the same transmit probability."""
    if not service_radius >= 0:
        raise DomainError(f"service_radius must be >= 0, got {service_radius}")
    check_probability(shared_tx_prob, "shared_tx_prob")
    count = sum(1 for r, _ in scenario.users if r <= service_radius)
    return ServedSet.uniform(count, shared_tx_prob)


def apply_scenario(config: GameConfig, scenario: DiscScenario, service_radius: float,
                   shared_tx_prob: float, population_from_count=False) -> GameConfig:
    """Feed a sampled scenario into a config.

    By default only the served set changes and ``N`` stays as configured;
    with ``population_from_count`` the population becomes the number of
    sampled users (at least 1).
    """
    served = served_set(scenario, service_radius, shared_tx_prob)
    market: MarketConfig = dataclasses.replace(config.market, user_tx_probs=served.tx_probs)
    if population_from_count:
        market = dataclasses.replace(market, population_size=max(1, len(scenario)))
    return dataclasses.replace(config, market=market)
