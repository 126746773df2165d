"""Domain types for the two-operator availability/pricing game and config parsing.

Every type is a frozen dataclass; validation happens once in
:func:`validate_config`, after which instances are safe to share.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Mapping, NamedTuple, Union

from .exceptions import (
    ConfigError,
    InconsistentTiming,
    InvalidType,
    MissingField,
    OutOfRange,
)

BEACON_TERMS = ("duty_cycle", "literal_share")


@dataclass(frozen=True)
class TimingConfig:
    slot_period: float
    num_slots: int

    @property
    def window(self) -> float:
        return self.num_slots * self.slot_period


@dataclass(frozen=True)
class ConstantLos:
    p: float


@dataclass(frozen=True)
class ElevationSigmoidLos:
    a: float
    b: float


LosModel = Union[ConstantLos, ElevationSigmoidLos]


@dataclass(frozen=True)
class RadioParams:
    tx_power: float
    noise_power: float
    sinr_threshold: float
    pathloss_exponent: float
    altitude: float
    cell_radius: float
    los_model: LosModel = ConstantLos(1.0)


@dataclass(frozen=True)
class DirectCoverage:
    p_cov: float


@dataclass(frozen=True)
class ComputedCoverage:
    radio: RadioParams


@dataclass(frozen=True)
class EnergyParams:
    beacon_cost: float
    rx_cost: float
    ack_cost: float
    switch_cost: float
    beacon_term: str = "duty_cycle"


class Strategy(NamedTuple):
    beacon_duration: float
    fee: float


class StrategyProfile(NamedTuple):
    first: Strategy
    second: Strategy

    def swapped(self) -> "StrategyProfile":
        return StrategyProfile(self.second, self.first)


@dataclass(frozen=True)
class UavParams:
    encounter_rate: float
    coverage: Union[DirectCoverage, ComputedCoverage]
    energy: EnergyParams
    strategy: Strategy | None = None


@dataclass(frozen=True)
class MarketConfig:
    temperature: float
    population_size: int
    fee_min: float
    fee_max: float
    user_tx_probs: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class GameConfig:
    timing: TimingConfig
    market: MarketConfig
    uav: tuple[UavParams, UavParams]
    seed: int | None = None

    def default_profile(self) -> StrategyProfile:
        """Per-operator strategies from the document, midpoint of the box otherwise."""
        mid = Strategy(self.timing.slot_period / 2, (self.market.fee_min + self.market.fee_max) / 2)
        return StrategyProfile(*(u.strategy if u.strategy is not None else mid for u in self.uav))

    def swapped(self) -> "GameConfig":
        return GameConfig(self.timing, self.market, (self.uav[1], self.uav[0]), self.seed)

    def to_dict(self) -> dict:
        return config_to_dict(self)

    def digest(self) -> str:
        """Short content hash used to stamp output files."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- input validation helpers -------------------------------------------------


def check_probability(value, name="probability"):
    from .exceptions import DomainError

    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name}={value!r} outside [0, 1]")
    return value


def check_strategy(strategy: Strategy, timing: TimingConfig, market: MarketConfig) -> Strategy:
    """Raise ``DomainError`` unless ``strategy`` lies in the operator's box."""
    from .exceptions import DomainError

    tau, fee = strategy
    if not 0.0 <= tau <= timing.slot_period:
        raise DomainError(f"beacon_duration={tau!r} outside [0, {timing.slot_period}]")
    if not market.fee_min <= fee <= market.fee_max:
        raise DomainError(f"fee={fee!r} outside [{market.fee_min}, {market.fee_max}]")
    return strategy


def check_profile(profile, config: GameConfig) -> StrategyProfile:
    profile = StrategyProfile(*(Strategy(*s) for s in profile))
    for s in profile:
        check_strategy(s, config.timing, config.market)
    return profile


# -- document validation ------------------------------------------------------


class _Collector:
    """Accumulates violations so a single pass reports all of them."""

    def __init__(self):
        self.violations = []

    def section(self, doc, key, path):
        if not isinstance(doc, Mapping):
            return None
        if key not in doc:
            self.violations.append(MissingField(path))
            return None
        value = doc[key]
        if not isinstance(value, Mapping):
            self.violations.append(InvalidType(path, "expected an object"))
            return None
        return value

    def number(self, doc, key, path, *, lower=None, lower_strict=False, upper=None,
               integer=False, required=True, default=None):
        if doc is None:
            return default
        if key not in doc:
            if required:
                self.violations.append(MissingField(path))
            return default
        value = doc[key]
        if isinstance(value, bool) or not isinstance(value, Real):
            self.violations.append(InvalidType(path, f"expected a number, got {value!r}"))
            return default
        try:
            finite = math.isfinite(value)
        except OverflowError:  # ints beyond float range
            finite = False
        if not finite:
            self.violations.append(OutOfRange(path, value, "finite"))
            return default
        if integer:
            if float(value) != int(value):
                self.violations.append(InvalidType(path, f"expected an integer, got {value!r}"))
                return default
            value = int(value)
        else:
            value = float(value)
        if lower is not None:
            if lower_strict and not value > lower:
                self.violations.append(OutOfRange(path, value, f">{_fmt(lower)}"))
                return default
            if not lower_strict and not value >= lower:
                self.violations.append(OutOfRange(path, value, f">={_fmt(lower)}"))
                return default
        if upper is not None and not value <= upper:
            self.violations.append(OutOfRange(path, value, f"<={_fmt(upper)}"))
            return default
        return value


def _fmt(x):
    return repr(int(x)) if float(x).is_integer() else repr(x)


def _parse_los(c: _Collector, doc, path):
    if doc is None:
        return ConstantLos(1.0)
    if not isinstance(doc, Mapping):
        c.violations.append(InvalidType(path, "expected an object"))
        return None
    variant = doc.get("variant")
    if variant == "constant":
        p = c.number(doc, "p", f"{path}.p", lower=0.0, upper=1.0)
        return None if p is None else ConstantLos(p)
    if variant == "elevation_sigmoid":
        a = c.number(doc, "a", f"{path}.a", lower=0.0, lower_strict=True)
        b = c.number(doc, "b", f"{path}.b", lower=0.0, lower_strict=True)
        return None if a is None or b is None else ElevationSigmoidLos(a, b)
    c.violations.append(InvalidType(f"{path}.variant", f"unknown LoS variant {variant!r}"))
    return None


def _parse_radio(c: _Collector, doc, path):
    names = ("tx_power", "noise_power", "sinr_threshold", "pathloss_exponent", "altitude", "cell_radius")
    values = {n: c.number(doc, n, f"{path}.{n}", lower=0.0, lower_strict=True) for n in names}
    los = _parse_los(c, doc.get("los_model") if isinstance(doc, Mapping) else None, f"{path}.los_model")
    if any(v is None for v in values.values()) or los is None:
        return None
    return RadioParams(los_model=los, **values)


def _parse_coverage(c: _Collector, doc, path):
    if not isinstance(doc, Mapping):
        return None
    variant = doc.get("variant", "direct" if "p_cov" in doc else "computed" if "radio" in doc else None)
    if variant == "direct":
        p = c.number(doc, "p_cov", f"{path}.p_cov", lower=0.0, upper=1.0)
        return None if p is None else DirectCoverage(p)
    if variant == "computed":
        radio = c.section(doc, "radio", f"{path}.radio")
        if radio is None:
            return None
        parsed = _parse_radio(c, radio, f"{path}.radio")
        return None if parsed is None else ComputedCoverage(parsed)
    c.violations.append(InvalidType(f"{path}.variant", f"unknown coverage variant {variant!r}"))
    return None


def _parse_energy(c: _Collector, doc, path):
    names = ("beacon_cost", "rx_cost", "ack_cost", "switch_cost")
    values = {n: c.number(doc, n, f"{path}.{n}", lower=0.0) for n in names}
    term = doc.get("beacon_term", "duty_cycle") if isinstance(doc, Mapping) else "duty_cycle"
    if term not in BEACON_TERMS:
        c.violations.append(InvalidType(f"{path}.beacon_term", f"expected one of {BEACON_TERMS}"))
        return None
    if any(v is None for v in values.values()):
        return None
    return EnergyParams(beacon_term=term, **values)


def _parse_strategy(c: _Collector, doc, path, timing, market):
    if doc is None:
        return None
    if not isinstance(doc, Mapping):
        c.violations.append(InvalidType(path, "expected an object"))
        return None
    t_upper = timing.slot_period if timing else None
    f_lower = market.fee_min if market else 0.0
    f_upper = market.fee_max if market else None
    tau = c.number(doc, "beacon_duration", f"{path}.beacon_duration", lower=0.0, upper=t_upper)
    fee = c.number(doc, "fee", f"{path}.fee", lower=f_lower, upper=f_upper)
    return None if tau is None or fee is None else Strategy(tau, fee)


def _parse_timing(c: _Collector, doc):
    if doc is None:
        return None
    T = c.number(doc, "slot_period", "timing.slot_period", lower=0.0, lower_strict=True)
    ell = c.number(doc, "num_slots", "timing.num_slots", lower=1, integer=True)
    if T is None or ell is None:
        return None
    if "window" in doc:
        m = c.number(doc, "window", "timing.window")
        if m is not None and not math.isclose(m, ell * T, rel_tol=1e-12, abs_tol=0.0):
            c.violations.append(InconsistentTiming("timing.window", f"{m!r} != num_slots*slot_period = {ell * T!r}"))
            return None
    return TimingConfig(T, ell)


def _parse_market(c: _Collector, doc):
    if doc is None:
        return None
    mu = c.number(doc, "temperature", "market.temperature", lower=0.0, lower_strict=True)
    n = c.number(doc, "population_size", "market.population_size", lower=0, integer=True)
    fmin = c.number(doc, "fee_min", "market.fee_min", lower=0.0, required=False, default=0.0)
    fmax = c.number(doc, "fee_max", "market.fee_max", lower=0.0, lower_strict=True)
    if fmin is not None and fmax is not None and not fmin < fmax:
        c.violations.append(OutOfRange("market.fee_min", fmin, f"<{_fmt(fmax)}"))
        fmin = None
    probs = _parse_tx_probs(c, doc, n)
    if None in (mu, n, fmin, fmax, probs):
        return None
    return MarketConfig(mu, n, fmin, fmax, probs)


def _parse_tx_probs(c: _Collector, doc, n):
    if "user_tx_probs" in doc:
        raw = doc["user_tx_probs"]
        if not isinstance(raw, (list, tuple)):
            c.violations.append(InvalidType("market.user_tx_probs", "expected a list"))
            return None
        vals = [c.number({"p": p}, "p", f"market.user_tx_probs[{k}]", lower=0.0, upper=1.0)
                for k, p in enumerate(raw)]
        return None if None in vals else tuple(vals)
    if "shared_tx_prob" in doc:
        p = c.number(doc, "shared_tx_prob", "market.shared_tx_prob", lower=0.0, upper=1.0)
        if p is None or n is None:
            return None
        return (p,) * n
    c.violations.append(MissingField("market.user_tx_probs"))
    return None


def validate_config(raw: Mapping[str, Any]) -> GameConfig:
    """Build a :class:`GameConfig` from a parsed JSON document.

    Raises :class:`ConfigError` listing every violation found.
    """
    c = _Collector()
    if not isinstance(raw, Mapping):
        raise ConfigError([InvalidType("<document>", "expected a JSON object")])
    timing = _parse_timing(c, c.section(raw, "timing", "timing"))
    market = _parse_market(c, c.section(raw, "market", "market"))

    uavs = []
    if "uav" not in raw:
        c.violations.append(MissingField("uav"))
    elif not isinstance(raw["uav"], (list, tuple)) or len(raw["uav"]) != 2:
        c.violations.append(InvalidType("uav", "expected an array of exactly 2 operators"))
    else:
        for k, udoc in enumerate(raw["uav"]):
            path = f"uav[{k}]"
            if not isinstance(udoc, Mapping):
                c.violations.append(InvalidType(path, "expected an object"))
                uavs.append(None)
                continue
            lam = c.number(udoc, "encounter_rate", f"{path}.encounter_rate", lower=0.0, lower_strict=True)
            cov = _parse_coverage(c, c.section(udoc, "coverage", f"{path}.coverage"), f"{path}.coverage")
            en = _parse_energy(c, c.section(udoc, "energy", f"{path}.energy"), f"{path}.energy")
            strat = _parse_strategy(c, udoc.get("strategy"), f"{path}.strategy", timing, market)
            ok = None not in (lam, cov, en) and (strat is not None or udoc.get("strategy") is None)
            uavs.append(UavParams(lam, cov, en, strat) if ok else None)

    seed = None
    if raw.get("seed") is not None:
        seed = c.number(raw, "seed", "seed", lower=0, integer=True)

    if c.violations:
        raise ConfigError(c.violations)
    return GameConfig(timing, market, (uavs[0], uavs[1]), seed)


def violation_fields(err: ConfigError) -> list[str]:
    return [v.field for v in err.violations]


# -- serialization ------------------------------------------------------------


def _los_to_dict(los):
    if isinstance(los, ConstantLos):
        return {"variant": "constant", "p": los.p}
    return {"variant": "elevation_sigmoid", "a": los.a, "b": los.b}


def _coverage_to_dict(cov):
    if isinstance(cov, DirectCoverage):
        return {"variant": "direct", "p_cov": cov.p_cov}
    r = cov.radio
    return {
        "variant": "computed",
        "radio": {
            "tx_power": r.tx_power,
            "noise_power": r.noise_power,
            "sinr_threshold": r.sinr_threshold,
            "pathloss_exponent": r.pathloss_exponent,
            "altitude": r.altitude,
            "cell_radius": r.cell_radius,
            "los_model": _los_to_dict(r.los_model),
        },
    }


def config_to_dict(config: GameConfig) -> dict:
    out = {
        "timing": {
            "slot_period": config.timing.slot_period,
            "num_slots": config.timing.num_slots,
            "window": config.timing.window,
        },
        "market": {
            "temperature": config.market.temperature,
            "population_size": config.market.population_size,
            "fee_min": config.market.fee_min,
            "fee_max": config.market.fee_max,
            "user_tx_probs": list(config.market.user_tx_probs),
        },
        "uav": [],
    }
    for u in config.uav:
        e = u.energy
        entry = {
            "encounter_rate": u.encounter_rate,
            "coverage": _coverage_to_dict(u.coverage),
            "energy": {
                "beacon_cost": e.beacon_cost,
                "rx_cost": e.rx_cost,
                "ack_cost": e.ack_cost,
                "switch_cost": e.switch_cost,
                "beacon_term": e.beacon_term,
            },
        }
        if u.strategy is not None:
            entry["strategy"] = {"beacon_duration": u.strategy.beacon_duration, "fee": u.strategy.fee}
        out["uav"].append(entry)
    if config.seed is not None:
        out["seed"] = config.seed
    return out


def load_config(path) -> GameConfig:
    with open(path, encoding="utf-8") as fh:
        return validate_config(json.load(fh))
