"""Best-response dynamics over the joint (beacon duration, fee) strategy box.

Each operator's argmax is taken on a coarse grid and then refined on
successively smaller windows (shrink factor 4) around the incumbent. The
estimator front-end :class:`BestResponseDynamics` exposes the learner with the
usual ``fit`` / ``predict`` / ``get_params`` surface.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import GameConfig, Strategy, StrategyProfile, check_profile, check_strategy
from .exceptions import DomainError, NonConvergenceWarning
from .market import Payoff

UPDATE_MODES = ("simultaneous", "sequential")
SHRINK = 4


@dataclass(frozen=True)
class LearningConfig:
    max_iterations: int = 100
    update_mode: str = "simultaneous"
    grid_resolution: int = 64
    refine_iterations: int = 3
    fp_tolerance: float | None = None
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.update_mode not in UPDATE_MODES:
            raise DomainError(f"update_mode must be one of {UPDATE_MODES}, got {self.update_mode!r}")
        if self.grid_resolution < 8:
            raise DomainError(f"grid_resolution must be >= 8, got {self.grid_resolution}")
        if self.refine_iterations < 0:
            raise DomainError(f"refine_iterations must be >= 0, got {self.refine_iterations}")
        if self.fp_tolerance is not None and not self.fp_tolerance > 0:
            raise DomainError(f"fp_tolerance must be > 0, got {self.fp_tolerance}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")

    @property
    def cell_width(self) -> float:
        """Finest grid spacing, as a fraction of the box width along each axis."""
        return 1.0 / ((self.grid_resolution - 1) * SHRINK**self.refine_iterations)

    @property
    def cell_diameter(self) -> float:
        """Diagonal of one refined cell in box-normalised coordinates."""
        return math.sqrt(2.0) * self.cell_width

    @property
    def tolerance(self) -> float:
        return self.cell_diameter if self.fp_tolerance is None else self.fp_tolerance

    @classmethod
    def from_dict(cls, doc) -> "LearningConfig":
        names = cls.__dataclass_fields__.keys()
        unknown = set(doc) - set(names)
        if unknown:
            raise DomainError(f"unknown learning fields: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class TraceRow:
    round: int
    profile: StrategyProfile
    utilities: tuple[float, float]
    residual: float


@dataclass
class Trace:
    iterations: list[TraceRow]
    converged_at: int | None
    final_residual: float
    init: StrategyProfile | None = None


@dataclass
class EquilibriumReport:
    profile: StrategyProfile
    trace: Trace
    br_residual: float
    restart_agreement: float | None = None
    restart_profiles: list[StrategyProfile] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.trace.converged_at is not None


# -- geometry -----------------------------------------------------------------


def _widths(config: GameConfig):
    return config.timing.slot_period, config.market.fee_max - config.market.fee_min


def strategy_distance(a: Strategy, b: Strategy, config: GameConfig) -> float:
    """Euclidean distance after dividing each coordinate by its box width."""
    wt, wf = _widths(config)
    return math.hypot((a[0] - b[0]) / wt, (a[1] - b[1]) / wf)


def profile_distance(p: StrategyProfile, q: StrategyProfile, config: GameConfig) -> float:
    return max(strategy_distance(p[k], q[k], config) for k in range(2))


# -- best response ------------------------------------------------------------


def _grid_argmax(payoff, t_lo, t_hi, f_lo, f_hi, n, rival):
    taus = np.linspace(t_lo, t_hi, n)
    fees = np.linspace(f_lo, f_hi, n)
    u = payoff(taus[:, None], fees[None, :], rival[0], rival[1])
    # first maximum in row-major order: lowest tau, then lowest fee
    k = int(np.argmax(u))
    i, j = divmod(k, n)
    return float(taus[i]), float(fees[j]), float(u[i, j])


def _window(centre, width, lo, hi):
    a = centre - 0.5 * width
    a = min(max(a, lo), hi - width)
    return a, a + width


def _best_response(payoff: Payoff, rival, config: GameConfig, lc: LearningConfig) -> Strategy:
    T = config.timing.slot_period
    fmin, fmax = config.market.fee_min, config.market.fee_max
    n = lc.grid_resolution
    tau, fee, best = _grid_argmax(payoff, 0.0, T, fmin, fmax, n, rival)
    wt, wf = T, fmax - fmin
    for _ in range(lc.refine_iterations):
        wt, wf = wt / SHRINK, wf / SHRINK
        t_lo, t_hi = _window(tau, wt, 0.0, T)
        f_lo, f_hi = _window(fee, wf, fmin, fmax)
        t_new, f_new, u_new = _grid_argmax(payoff, t_lo, t_hi, f_lo, f_hi, n, rival)
        if u_new > best:
            tau, fee, best = t_new, f_new, u_new
    return Strategy(tau, fee)


def best_response(who: int, rival: Strategy, config: GameConfig, lc: LearningConfig | None = None) -> Strategy:
    """Utility-maximising strategy of operator ``who`` against a fixed ``rival``."""
    lc = lc or LearningConfig()
    rival = check_strategy(Strategy(*rival), config.timing, config.market)
    return _best_response(Payoff(config, who), rival, config, lc)


def partial_best_response(who: int, rival: Strategy, own_fixed: float, axis: str, config: GameConfig,
                          lc: LearningConfig | None = None) -> float:
    """Best response along one coordinate with the operator's other coordinate frozen.

    ``axis="availability"`` optimises the beacon duration at fee ``own_fixed``;
    ``axis="pricing"`` optimises the fee at beacon duration ``own_fixed``.
    Same grid-then-refine scheme and tie-break as :func:`best_response`.
    """
    lc = lc or LearningConfig()
    rival = check_strategy(Strategy(*rival), config.timing, config.market)
    payoff = Payoff(config, who)
    if axis == "availability":
        lo, hi = 0.0, config.timing.slot_period
        fn = lambda x: payoff(x, own_fixed, rival[0], rival[1])
    elif axis == "pricing":
        lo, hi = config.market.fee_min, config.market.fee_max
        fn = lambda x: payoff(own_fixed, x, rival[0], rival[1])
    else:
        raise DomainError(f"axis must be 'availability' or 'pricing', got {axis!r}")
    n = lc.grid_resolution
    xs = np.linspace(lo, hi, n)
    u = fn(xs)
    k = int(np.argmax(u))
    x, best = float(xs[k]), float(u[k])
    w = hi - lo
    for _ in range(lc.refine_iterations):
        w /= SHRINK
        a, b = _window(x, w, lo, hi)
        xs = np.linspace(a, b, n)
        u = fn(xs)
        k = int(np.argmax(u))
        if u[k] > best:
            x, best = float(xs[k]), float(u[k])
    return x


# -- dynamics -----------------------------------------------------------------


def random_profile(config: GameConfig, rng: np.random.Generator) -> StrategyProfile:
    T = config.timing.slot_period
    fmin, fmax = config.market.fee_min, config.market.fee_max
    return StrategyProfile(*(Strategy(float(rng.uniform(0.0, T)), float(rng.uniform(fmin, fmax))) for _ in range(2)))


def _run_once(config: GameConfig, lc: LearningConfig, init: StrategyProfile, payoffs) -> Trace:
    current = list(init)
    rows = []
    converged_at = None
    residual = math.inf
    for t in range(1, lc.max_iterations + 1):
        previous = list(current)
        if lc.update_mode == "simultaneous":
            current = [_best_response(payoffs[k], previous[1 - k], config, lc) for k in range(2)]
        else:
            current[0] = _best_response(payoffs[0], current[1], config, lc)
            current[1] = _best_response(payoffs[1], current[0], config, lc)
        profile = StrategyProfile(*current)
        utils = tuple(float(payoffs[k](*profile[k], *profile[1 - k])) for k in range(2))
        residual = profile_distance(profile, StrategyProfile(*previous), config)
        rows.append(TraceRow(t, profile, utils, residual))
        if residual < lc.tolerance:
            converged_at = t
            break
    return Trace(rows, converged_at, residual, init)


def restart_inits(config: GameConfig, lc: LearningConfig, n: int) -> list[StrategyProfile]:
    """``n`` seeded uniform initial profiles, one child seed per restart."""
    children = np.random.SeedSequence(lc.seed).spawn(n)
    return [random_profile(config, np.random.default_rng(c)) for c in children]


def br_residual(profile: StrategyProfile, config: GameConfig, lc: LearningConfig, payoffs=None) -> float:
    payoffs = payoffs or [Payoff(config, k) for k in range(2)]
    br = [_best_response(payoffs[k], profile[1 - k], config, lc) for k in range(2)]
    return max(strategy_distance(br[k], profile[k], config) for k in range(2))


def run_dynamics(config: GameConfig, lc: LearningConfig | None = None,
                 init: StrategyProfile | None = None) -> EquilibriumReport:
    """Iterate best responses from ``init`` until the profile stops moving.

    With ``lc.restarts > 1`` the extra runs start from fresh seeded random
    profiles and ``restart_agreement`` records the largest pairwise distance
    between the profiles they reach. A ``NonConvergenceWarning`` is emitted (and
    ``trace.converged_at`` is ``None``) if ``max_iterations`` is exhausted.
    """
    lc = lc or LearningConfig()
    payoffs = [Payoff(config, k) for k in range(2)]
    inits = restart_inits(config, lc, lc.restarts)
    if init is not None:
        inits[0] = check_profile(init, config)
    traces = [_run_once(config, lc, s, payoffs) for s in inits]
    main = traces[0]
    profile = main.iterations[-1].profile
    if main.converged_at is None:
        warnings.warn(f"no convergence after {lc.max_iterations} rounds (residual {main.final_residual:.3g})",
                      NonConvergenceWarning, stacklevel=2)
    ends = [tr.iterations[-1].profile for tr in traces]
    agreement = None
    if lc.restarts > 1:
        agreement = max(profile_distance(p, q, config) for p, q in itertools.combinations(ends, 2))
    return EquilibriumReport(profile, main, br_residual(profile, config, lc, payoffs), agreement, ends)


SWEEP_AXES = ("temperature", "coverage", "population", "encounter_rate")


def with_axis_value(config: GameConfig, axis: str, value, who: Sequence[int] = (0, 1)) -> GameConfig:
    """Copy of ``config`` with one sweep parameter overridden.

    ``value`` may be a scalar (applied to every operator in ``who``) or a pair
    giving one value per operator.
    """
    from .config import DirectCoverage

    if axis == "temperature":
        if not value > 0:
            raise DomainError(f"temperature must be > 0, got {value}")
        return replace(config, market=replace(config.market, temperature=float(value)))
    if axis == "population":
        n = int(value)
        if n != value or n < 0:
            raise DomainError(f"population must be a nonnegative integer, got {value}")
        return replace(config, market=replace(config.market, population_size=n))
    values = value if isinstance(value, (tuple, list)) else (value,) * 2
    uav = list(config.uav)
    for k in who:
        v = float(values[k])
        if axis == "coverage":
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"coverage must be in [0, 1], got {v}")
            uav[k] = replace(uav[k], coverage=DirectCoverage(v))
        elif axis == "encounter_rate":
            if not v > 0:
                raise DomainError(f"encounter rate must be > 0, got {v}")
            uav[k] = replace(uav[k], encounter_rate=v)
        else:
            raise DomainError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    return replace(config, uav=(uav[0], uav[1]))


def sweep_equilibria(config_template: GameConfig, sweep_axis: str, values, lc: LearningConfig | None = None,
                     init: StrategyProfile | None = None):
    """One independent equilibrium per swept value, in input order.

    Every point starts from the same seeded initial profile, so results are
    reproducible and comparable along the sweep.
    """
    lc = lc or LearningConfig()
    out = []
    for v in values:
        cfg = with_axis_value(config_template, sweep_axis, v)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonConvergenceWarning)
            out.append((v, run_dynamics(cfg, lc, init)))
    return out


# -- estimator front-end ------------------------------------------------------


class BestResponseDynamics(BaseEstimator):
    """Best-response learner for the two-operator game.

    Parameters mirror :class:`LearningConfig`. ``fit(config)`` runs the
    dynamics and stores ``profile_``, ``trace_``, ``report_`` and
    ``converged_``; ``predict(X, who)`` maps rival strategies (rows of
    ``[beacon_duration, fee]``) to operator ``who``'s best responses.
    """

    def __init__(self, max_iterations=100, update_mode="simultaneous", grid_resolution=64,
                 refine_iterations=3, fp_tolerance=None, restarts=1, seed=0):
        self.max_iterations = max_iterations
        self.update_mode = update_mode
        self.grid_resolution = grid_resolution
        self.refine_iterations = refine_iterations
        self.fp_tolerance = fp_tolerance
        self.restarts = restarts
        self.seed = seed

    def learning_config(self) -> LearningConfig:
        return LearningConfig(**self.get_params())

    def fit(self, config: GameConfig, init: StrategyProfile | None = None):
        if not isinstance(config, GameConfig):
            raise TypeError(f"fit expects a GameConfig, got {type(config).__name__}")
        lc = self.learning_config()
        report = run_dynamics(config, lc, init)
        self.config_ = config
        self.report_ = report
        self.profile_ = report.profile
        self.trace_ = report.trace
        self.converged_ = report.converged
        self.n_iter_ = len(report.trace.iterations)
        return self

    def predict(self, X, who: int = 0):
        check_is_fitted(self, "config_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != 2:
            raise ValueError(f"expected rival strategies of shape (n, 2), got {X.shape}")
        lc = self.learning_config()
        payoff = Payoff(self.config_, who)
        rows = []
        for tau_j, f_j in X:
            rival = check_strategy(Strategy(tau_j, f_j), self.config_.timing, self.config_.market)
            rows.append(_best_response(payoff, rival, self.config_, lc))
        return np.array(rows, dtype=float)
