import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from uavgame import oracles
from uavgame.config import Strategy, StrategyProfile, TimingConfig
from uavgame.exceptions import DomainError
from uavgame.quadrature import adaptive_simpson
from uavgame.temporal import (EncounterPair, Order, beacon_prob, first_encounter_prob, service_prob,
                              service_probability, sleep_prob)

from conftest import make_config


def literal_beacon(lam, tau, T, m):
    """Expression exactly as printed in the source publication (reference only)."""
    e = math.exp
    return -(e(lam * T) * (e(-m * lam) - e(-lam * (m + tau)) - 1 + e(-lam * tau))) / (e(lam * T) - 1)


def literal_sleep(lam, tau, T, m):
    e = math.exp
    return e(lam * T) * (-e(-lam * (m + tau)) + e(-lam * (m + T)) + e(-lam * tau) - e(-lam * T)) / (e(lam * T) - 1)


def literal_race(li, lj, m):
    e = math.exp
    return (lj * e(-m * (li + lj)) + (-li - lj) * e(-lj * m) + li) / (li + lj)


def simpson_slot_sum(lam, lo_of, hi_of, l, T):
    f = lambda x: lam * math.exp(-lam * x)
    return sum(adaptive_simpson(f, lo_of(s * T), hi_of(s * T), abs_tol=1e-12, max_subdivisions=2**20)
               for s in range(l))


T1 = TimingConfig(1.0, 100)


def test_beacon_examples():
    assert beacon_prob(1.0, 0.0, T1) == 0.0
    assert beacon_prob(1.0, 1.0, T1) == pytest.approx(-math.expm1(-100.0), abs=1e-15)
    t = TimingConfig(1.0, 10)
    ref = simpson_slot_sum(0.5, lambda s: s, lambda s: s + 0.3, 10, 1.0)
    assert abs(beacon_prob(0.5, 0.3, t) - ref) <= 1e-10


def test_sleep_examples():
    assert sleep_prob(0.7, 1.0, T1) == pytest.approx(0.0, abs=1e-15)
    assert sleep_prob(0.7, 0.0, T1) == pytest.approx(-math.expm1(-70.0), abs=1e-15)
    t = TimingConfig(1.0, 10)
    ref = simpson_slot_sum(0.5, lambda s: s + 0.3, lambda s: s + 1.0, 10, 1.0)
    assert abs(sleep_prob(0.5, 0.3, t) - ref) <= 1e-10


@pytest.mark.parametrize("tau", [-0.01, 1.01, float("nan")])
def test_beacon_domain(tau):
    with pytest.raises(DomainError):
        beacon_prob(1.0, tau, T1)
    with pytest.raises(DomainError):
        sleep_prob(1.0, tau, T1)


def test_rate_domain():
    with pytest.raises(DomainError):
        beacon_prob(0.0, 0.5, T1)
    with pytest.raises(DomainError):
        EncounterPair(1.0, -1.0, 3.0)


def test_literal_expressions_match():
    rng = np.random.default_rng(7)
    for _ in range(200):
        lam, T = rng.uniform(0.05, 3.0), rng.uniform(0.1, 2.0)
        l = int(rng.integers(1, 60))
        tau = rng.uniform(0, T)
        t = TimingConfig(T, l)
        assert beacon_prob(lam, tau, t) == pytest.approx(literal_beacon(lam, tau, T, T * l), abs=1e-12)
        assert sleep_prob(lam, tau, t) == pytest.approx(literal_sleep(lam, tau, T, T * l), abs=1e-12)
        lj = rng.uniform(0.05, 3.0)
        p = EncounterPair(lam, lj, T * l)
        assert first_encounter_prob(p, "i_first") == pytest.approx(literal_race(lam, lj, T * l), abs=1e-12)
        assert first_encounter_prob(p, "j_first") == pytest.approx(literal_race(lj, lam, T * l), abs=1e-12)


def test_race_examples():
    assert first_encounter_prob(EncounterPair.unchecked(1.0, 2.0, 0.0)) == 0.0
    assert first_encounter_prob(EncounterPair(1.3, 1.3, 500.0)) == pytest.approx(0.5, abs=1e-15)
    p = EncounterPair(1.0, 2.0, 3.0)
    ref, _ = dblquad(lambda x, y: 1.0 * 2.0 * math.exp(-x - 2.0 * y), 0.0, 3.0, 0.0, lambda y: y,
                     epsabs=1e-13, epsrel=1e-13)
    assert abs(first_encounter_prob(p, Order.I_FIRST) - ref) <= 1e-8
    assert abs(oracles.race_prob(1.0, 2.0, 3.0) - ref) <= 1e-12


def test_race_swap_symmetry():
    p, q = EncounterPair(0.4, 2.5, 7.0), EncounterPair(2.5, 0.4, 7.0)
    assert first_encounter_prob(p, "i_first") == first_encounter_prob(q, "j_first")
    assert first_encounter_prob(p, "j_first") == first_encounter_prob(q, "i_first")


rates = st.floats(min_value=1e-3, max_value=20.0)
periods = st.floats(min_value=1e-2, max_value=5.0)


@settings(max_examples=400, deadline=None)
@given(rates, periods, st.integers(1, 300), st.floats(0.0, 1.0))
def test_partition_identity(lam, T, l, frac):
    t = TimingConfig(T, l)
    tau = frac * T
    b, s = beacon_prob(lam, tau, t), sleep_prob(lam, tau, t)
    assert 0.0 <= b <= 1.0 and 0.0 <= s <= 1.0
    assert abs(b + s + math.expm1(-lam * t.window)) <= 1e-12


@settings(max_examples=400, deadline=None)
@given(rates, rates, st.floats(min_value=1e-3, max_value=500.0))
def test_race_total(li, lj, m):
    p = EncounterPair(li, lj, m)
    a, b = first_encounter_prob(p, "i_first"), first_encounter_prob(p, "j_first")
    assert 0.0 <= a <= 1.0 and 0.0 <= b <= 1.0
    assert abs(a + b - math.expm1(-li * m) * math.expm1(-lj * m)) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(rates, periods, st.integers(1, 100), st.floats(0.0, 0.98))
def test_beacon_monotone_in_tau(lam, T, l, frac):
    t = TimingConfig(T, l)
    a, b = beacon_prob(lam, frac * T, t), beacon_prob(lam, (frac + 0.02) * T, t)
    assert b > a or b == pytest.approx(a, abs=1e-15)
    assert sleep_prob(lam, (frac + 0.02) * T, t) <= sleep_prob(lam, frac * T, t) + 1e-15


@pytest.mark.parametrize("lam", [1e-9, 3e-10, 1e-12])
def test_small_rate_series(lam):
    t = TimingConfig(1.0, 50)
    for tau in (0.0, 0.2, 0.7, 1.0):
        b, s = beacon_prob(lam, tau, t), sleep_prob(lam, tau, t)
        assert math.isfinite(b) and math.isfinite(s)
        m = t.window
        # leading terms: each slot contributes about lam * (on-length) of probability mass
        assert b == pytest.approx(lam * tau * 50 * (1 - lam * m / 2), rel=1e-6, abs=1e-300)
        assert s == pytest.approx(lam * (1 - tau) * 50 * (1 - lam * m / 2), rel=1e-6, abs=1e-300)


def test_series_branch_is_continuous():
    t = TimingConfig(1.0, 20)
    below, above = beacon_prob(0.99e-8, 0.4, t), beacon_prob(1.01e-8, 0.4, t)
    assert below / 0.99 == pytest.approx(above / 1.01, rel=1e-6)


# -- service probability -------------------------------------------------------


def test_service_examples():
    cfg = make_config()
    sym = StrategyProfile(Strategy(0.5, 3.0), Strategy(0.5, 3.0))
    a, b = service_prob(sym, cfg, 0), service_prob(sym, cfg, 1)
    assert a == b
    ref = oracles.service_prob(0.5, 0.5, 1.0, 1.0, 1.0, 100, 0.8)
    assert abs(a - ref) <= 1e-12
    assert service_prob(StrategyProfile(Strategy(0.0, 3.0), Strategy(0.5, 3.0)), cfg, 0) == 0.0
    assert service_prob(sym, make_config(pcov=(0.0, 0.8)), 0) == 0.0


@settings(max_examples=200, deadline=None)
@given(rates, rates, st.floats(0, 1), st.floats(0, 0.95), st.floats(0, 1))
def test_service_monotonicity(li, lj, ti, tj, pcov):
    t = TimingConfig(1.0, 30)
    p = service_probability(ti, tj, li, lj, t, pcov)
    assert 0.0 <= p <= 1.0
    assert service_probability(ti, tj + 0.05, li, lj, t, pcov) <= p + 1e-15
    assert service_probability(min(ti + 0.05, 1.0), tj, li, lj, t, pcov) >= p - 1e-15
