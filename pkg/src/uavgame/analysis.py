"""Second-order structure of the availability and pricing games.

Closed-form fee derivatives of the logit share and of the utility, central
finite-difference Hessians for both games, and lattice surveys that check
sub/super-modularity and the dominance-solvability inequality
``-d2U/dx_i2 - |d2U/dx_j dx_i| >= 0``.

The pricing mixed partial is implemented as ``N P_srv pi (1-pi) / mu *
(1 - f_i (e_j^2 - e_i^2) / (mu (e_i + e_j)^2))`` with ``e_k = exp(-f_k/mu)``;
this is the form that agrees with finite differences of the utility.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .config import GameConfig, StrategyProfile, check_profile
from .exceptions import BoundaryPoint, DomainError, FactorNearZero
from .market import Payoff, ServedSet, activity_cost, logit_share

Axis = Literal["availability", "pricing"]
AXES = ("availability", "pricing")
#: claimed modularity of each single-coordinate game
CLAIMS = {"availability": "submodular", "pricing": "supermodular"}
SOLVABILITY_TOL = 1e-9


@dataclass(frozen=True)
class Psi:
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise DomainError(f"psi must be >= 0, got {self.value}")

    def __float__(self):
        return float(self.value)


def psi(served: ServedSet, params) -> Psi:
    """Per-contact receive and acknowledgement energy."""
    return Psi(activity_cost(served, params))


# -- closed-form fee derivatives ----------------------------------------------


def _scaled_exps(f_i, f_j, mu):
    f_i = np.asarray(f_i, dtype=float)
    f_j = np.asarray(f_j, dtype=float)
    shift = np.minimum(f_i, f_j)
    # common factor exp(-shift/mu) cancels in every ratio below
    return np.exp(-(f_i - shift) / mu), np.exp(-(f_j - shift) / mu)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def price_share_derivatives(f_i, f_j, mu):
    """First and second derivatives of the logit share with respect to the own fee."""
    a, b = _scaled_exps(f_i, f_j, mu)
    s = a + b
    first = -(1.0 / mu) * a * b / s**2
    second = a * b * (b**2 - a**2) / (mu**2 * s**4)
    return _out(first), _out(second)


def cross_share_derivative(f_i, f_j, mu):
    """d2 pi_i / (d f_j d f_i)."""
    a, b = _scaled_exps(f_i, f_j, mu)
    s = a + b
    return _out(a * b * (a**2 - b**2) / (mu**2 * s**4))


def pricing_bracket(f_i, f_j, mu):
    """Sign-carrying bracket ``1 - f_i (e_j^2 - e_i^2) / (mu (e_i + e_j)^2)`` of the mixed partial."""
    a, b = _scaled_exps(f_i, f_j, mu)
    return _out(1.0 - np.asarray(f_i) * (b**2 - a**2) / (mu * (a + b) ** 2))


def pricing_bracket_as_printed(f_i, f_j, mu):
    """Variant of :func:`pricing_bracket` with ``e_j^2 + e_i^2``; reported for comparison only."""
    a, b = _scaled_exps(f_i, f_j, mu)
    return _out(1.0 - np.asarray(f_i) * (b**2 + a**2) / (mu * (a + b) ** 2))


def _service_and_beacon(profile, config, who):
    profile = check_profile(profile, config)
    if who not in (0, 1):
        raise IndexError(f"operator index must be 0 or 1, got {who}")
    pay = Payoff(config, who)
    me, rival = profile[who], profile[1 - who]
    p_srv = float(pay.service(me.beacon_duration, rival.beacon_duration))
    literal = pay.energy_params.beacon_term == "literal_share"
    eb = pay.energy_params.beacon_cost if literal else 0.0
    return pay, me, rival, p_srv, eb


def utility_second_derivative_price(profile, config: GameConfig, who: int, verify=False) -> float:
    """``d2U_i/df_i2 = N P_srv (2 dpi/df_i + f_i d2pi/df_i2)``.

    Under the ``literal_share`` beaconing term the energy contributes
    ``-beacon_cost * d2pi/df_i2`` as well. With ``verify=True`` the value is
    compared against a central difference of :class:`Payoff` (relative 1e-4).
    """
    pay, me, rival, p_srv, eb = _service_and_beacon(profile, config, who)
    mu = config.market.temperature
    d1, d2 = price_share_derivatives(me.fee, rival.fee, mu)
    value = config.market.population_size * p_srv * (2.0 * d1 + me.fee * d2) - eb * d2
    if verify:
        h = 1e-4 * (config.market.fee_max - config.market.fee_min)
        probe = _second_diff(lambda f: pay(me.beacon_duration, f, rival.beacon_duration, rival.fee), me.fee, h)
        if not np.isclose(value, probe, rtol=1e-4, atol=1e-8 * max(1.0, abs(probe))):
            raise AssertionError(f"closed form {value!r} disagrees with finite difference {probe!r}")
    return float(value)


def utility_mixed_derivative_price(profile, config: GameConfig, who: int) -> float:
    """``d2U_i/(df_j df_i)`` in closed form."""
    pay, me, rival, p_srv, eb = _service_and_beacon(profile, config, who)
    mu = config.market.temperature
    a, b = _scaled_exps(me.fee, rival.fee, mu)
    s = a + b
    core = config.market.population_size * p_srv * a * b / (mu * s**2)
    value = core * pricing_bracket(me.fee, rival.fee, mu) - eb * cross_share_derivative(me.fee, rival.fee, mu)
    return float(value)


def pricing_dominance_margin(profile, config: GameConfig, who: int) -> float:
    """``-d2U_i/df_i2 - |d2U_i/df_j df_i|`` from the two closed forms."""
    return -utility_second_derivative_price(profile, config, who) - abs(
        utility_mixed_derivative_price(profile, config, who))


def pricing_dominance_margin_simplified(profile, config: GameConfig, who: int) -> float:
    """``N P_srv pi (1 - pi) / mu``: equals the margin wherever the pricing bracket is >= 0."""
    _, me, rival, p_srv, _ = _service_and_beacon(profile, config, who)
    mu = config.market.temperature
    pi = logit_share(me.fee, rival.fee, mu)
    return float(config.market.population_size * p_srv * pi * (1.0 - pi) / mu)


# -- finite differences -------------------------------------------------------


def _second_diff(fn, x, h):
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)


def _mixed_diff(fn, x, y, hx, hy):
    return (fn(x + hx, y + hy) - fn(x + hx, y - hy) - fn(x - hx, y + hy) + fn(x - hx, y - hy)) / (4.0 * hx * hy)


def _richardson(estimate, h, rtol=1e-3):
    """Central-difference estimate at ``h``; refine with ``h/2`` where the two disagree."""
    coarse = np.asarray(estimate(h), dtype=float)
    fine = np.asarray(estimate(h / 2.0), dtype=float)
    scale = np.maximum(np.abs(fine), 1e-12)
    refined = (4.0 * fine - coarse) / 3.0
    return np.where(np.abs(coarse - fine) > rtol * scale, refined, coarse)


def _axis_bounds(axis, config):
    if axis == "availability":
        return 0.0, config.timing.slot_period
    if axis == "pricing":
        return config.market.fee_min, config.market.fee_max
    raise DomainError(f"axis must be one of {AXES}, got {axis!r}")


def _axis_function(axis, pay: Payoff, me, rival):
    """Utility as a function of (own, rival) coordinate on ``axis``, other coordinates frozen."""
    if axis == "availability":
        return lambda xi, xj: pay(xi, me.fee, xj, rival.fee)
    return lambda xi, xj: pay(me.beacon_duration, xi, rival.beacon_duration, xj)


def _coords(axis, me, rival):
    k = 0 if axis == "availability" else 1
    return me[k], rival[k]


@dataclass
class Hessian:
    matrix: np.ndarray
    step: float
    factor_ratio: float | None = None
    factor_note: str = ""


def _fd_matrix(fn, xi, xj, h):
    uii = _richardson(lambda s: _second_diff(lambda x: fn(x, xj), xi, s), h)
    ujj = _richardson(lambda s: _second_diff(lambda y: fn(xi, y), xj, s), h)
    uij = _richardson(lambda s: _mixed_diff(fn, xi, xj, s, s), h)
    return uii, uij, ujj


def numeric_hessian(axis: Axis, profile, config: GameConfig, who: int, step=None) -> Hessian:
    """Central-difference Hessian of ``U_who`` in (own, rival) coordinates of ``axis``.

    The step defaults to ``1e-4`` of the axis width. On the availability axis
    the own second partial is also divided by ``(N f_i pi_i - psi_i)`` times
    a numeric ``d2 P_srv / d tau_i^2``; that ratio is stored as
    ``factor_ratio`` or skipped (with ``factor_note``) when the factor is
    within ``1e-6`` of zero.

    Raises
    ------
    BoundaryPoint
        If the stencil leaves the strategy box.
    """
    profile = check_profile(profile, config)
    lo, hi = _axis_bounds(axis, config)
    h = step if step is not None else 1e-4 * (hi - lo)
    pay = Payoff(config, who)
    me, rival = profile[who], profile[1 - who]
    xi, xj = _coords(axis, me, rival)
    for x in (xi, xj):
        if x - h < lo or x + h > hi:
            raise BoundaryPoint(f"{axis} coordinate {x} lies within one step ({h}) of [{lo}, {hi}]")
    uii, uij, ujj = _fd_matrix(_axis_function(axis, pay, me, rival), xi, xj, h)
    hess = Hessian(np.array([[uii, uij], [uij, ujj]], dtype=float), h)
    if axis == "availability":
        try:
            hess.factor_ratio = factor_check(profile, config, who, h)
        except FactorNearZero as exc:
            hess.factor_note = str(exc)
    return hess


def revenue_factor(profile, config: GameConfig, who: int) -> float:
    """``N f_i pi_i - psi_i``, the common factor of the availability-game partials."""
    profile = check_profile(profile, config)
    pay = Payoff(config, who)
    me, rival = profile[who], profile[1 - who]
    return float(config.market.population_size * me.fee * pay.share(me.fee, rival.fee) - pay.psi)


def factor_check(profile, config: GameConfig, who: int, step=None, atol=1e-6) -> float:
    """Ratio of the numeric ``d2U/dtau_i^2`` to ``d2P_srv/dtau_i^2 * (N f_i pi_i - psi_i)``."""
    profile = check_profile(profile, config)
    factor = revenue_factor(profile, config, who)
    if abs(factor) < atol:
        raise FactorNearZero(f"N f_i pi_i - psi_i = {factor:.3g} is too close to zero")
    h = step if step is not None else 1e-4 * config.timing.slot_period
    pay = Payoff(config, who)
    me, rival = profile[who], profile[1 - who]
    u = _richardson(lambda s: _second_diff(lambda t: pay(t, me.fee, rival.beacon_duration, rival.fee),
                                           me.beacon_duration, s), h)
    p = _richardson(lambda s: _second_diff(lambda t: pay.service(t, rival.beacon_duration),
                                           me.beacon_duration, s), h)
    if abs(p) < 1e-300:
        raise FactorNearZero("second derivative of the service probability vanishes")
    return float(u / (p * factor))


# -- lattice surveys ---------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Interior lattice over the (own, rival) coordinates of one game."""

    points: int = 25
    margin: float = 0.05

    def __post_init__(self):
        if self.points < 2:
            raise DomainError(f"grid needs at least 2 points per axis, got {self.points}")
        if not 0.0 < self.margin < 0.5:
            raise DomainError(f"margin must be in (0, 0.5), got {self.margin}")

    def values(self, lo, hi):
        w = hi - lo
        return np.linspace(lo + self.margin * w, hi - self.margin * w, self.points)


@dataclass
class ModularityReport:
    game_axis: str
    grid: dict
    rows: list[dict]
    violation_count: int
    verdict: str
    tolerance: float

    @property
    def mixed_partial_signs(self):
        return [np.sign(r["mixed"]) for r in self.rows]

    @property
    def violations(self):
        return [r for r in self.rows if r["violation"]]

    def summary(self) -> str:
        return f"{self.game_axis}: {self.verdict} ({self.violation_count} violations)"

    def to_csv(self) -> str:
        return _rows_to_csv(self.rows)


@dataclass
class SolvabilityReport:
    game_axis: str
    grid: dict
    samples: list[dict]
    all_satisfied: bool
    precondition_violations: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def violation_count(self):
        return sum(1 for s in self.samples if not s["satisfied"])

    def summary(self) -> str:
        verdict = "solvable" if self.all_satisfied else "not solvable"
        text = f"{self.game_axis} dominance solvability: {verdict} ({self.violation_count} violations)"
        if self.precondition_violations:
            text += f"; revenue-factor precondition N f pi - psi >= 0 fails at {self.precondition_violations} points"
        return text

    def to_csv(self) -> str:
        return _rows_to_csv(self.samples)


def _rows_to_csv(rows):
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def _lattice(axis, config, grid: GridSpec):
    lo, hi = _axis_bounds(axis, config)
    xs = grid.values(lo, hi)
    Xi, Xj = np.meshgrid(xs, xs, indexing="ij")
    return Xi.ravel(), Xj.ravel()


def _frozen(axis, config):
    """Frozen coordinates (the other game's strategies) from the config's default profile."""
    return config.default_profile()


def _survey(axis: Axis, config: GameConfig, grid: GridSpec):
    """Per lattice point and operator: own second partial, mixed partial, bracket, factor."""
    lo, hi = _axis_bounds(axis, config)
    xi_all, xj_all = _lattice(axis, config, grid)
    base = _frozen(axis, config)
    out = []
    for who in (0, 1):
        pay = Payoff(config, who)
        me, rival = base[who], base[1 - who]
        if axis == "availability":
            h = 1e-4 * (hi - lo)
            fn = _axis_function(axis, pay, me, rival)
            own, mixed, _ = _fd_matrix(fn, xi_all, xj_all, h)
            factor = config.market.population_size * me.fee * pay.share(me.fee, rival.fee) - pay.psi
            factor = np.full_like(xi_all, factor)
            bracket = np.full_like(xi_all, np.nan)
        else:
            mu = config.market.temperature
            p_srv = float(pay.service(me.beacon_duration, rival.beacon_duration))
            eb = pay.energy_params.beacon_cost if pay.energy_params.beacon_term == "literal_share" else 0.0
            d1, d2 = price_share_derivatives(xi_all, xj_all, mu)
            own = pay.population * p_srv * (2.0 * d1 + xi_all * d2) - eb * d2
            a, b = _scaled_exps(xi_all, xj_all, mu)
            bracket = pricing_bracket(xi_all, xj_all, mu)
            mixed = pay.population * p_srv * a * b / (mu * (a + b) ** 2) * bracket \
                - eb * cross_share_derivative(xi_all, xj_all, mu)
            factor = np.full_like(xi_all, np.nan)
        for k in range(xi_all.size):
            out.append((who, float(xi_all[k]), float(xj_all[k]), float(own[k]), float(mixed[k]),
                        float(bracket[k]), float(factor[k])))
    return out


def _names(axis):
    return ("tau_i", "tau_j") if axis == "availability" else ("f_i", "f_j")


def check_modularity(axis: Axis, config: GameConfig, grid: GridSpec | None = None, tol=None) -> ModularityReport:
    """Sign survey of the mixed partial ``d2U_i/(dx_j dx_i)`` over an interior lattice.

    The verdict is ``submodular`` if every sample is ``<= tol``,
    ``supermodular`` if every sample is ``>= -tol`` and ``indeterminate``
    otherwise; violations are counted against the claimed property of the
    axis (sub- for availability, super- for pricing). ``tol`` defaults to
    ``1e-6`` times the largest magnitude seen.
    """
    grid = grid or GridSpec()
    samples = _survey(axis, config, grid)
    mixed = np.array([s[4] for s in samples])
    if tol is None:
        tol = 1e-6 * max(1.0, float(np.max(np.abs(mixed))) if mixed.size else 1.0)
    sub = bool(np.all(mixed <= tol))
    sup = bool(np.all(mixed >= -tol))
    claim = CLAIMS[axis]
    if sub and sup:
        verdict = claim
    elif sub:
        verdict = "submodular"
    elif sup:
        verdict = "supermodular"
    else:
        verdict = "indeterminate"
    ni, nj = _names(axis)
    rows = []
    for who, xi, xj, own, mx, br, _ in samples:
        bad = mx > tol if claim == "submodular" else mx < -tol
        row = {"who": who, ni: xi, nj: xj, "mixed": mx, "sign": int(np.sign(mx)), "violation": int(bad)}
        if axis == "pricing":
            row["bracket"] = br
            row["bracket_as_printed"] = float(pricing_bracket_as_printed(xi, xj, config.market.temperature))
        rows.append(row)
    return ModularityReport(axis, {"points": grid.points, "margin": grid.margin}, rows,
                            sum(r["violation"] for r in rows), verdict, tol)


def check_solvability(axis: Axis, config: GameConfig, grid: GridSpec | None = None,
                      tol=SOLVABILITY_TOL) -> SolvabilityReport:
    """Dominance-solvability margins ``-d2U_i/dx_i^2 - |d2U_i/dx_j dx_i|`` over the lattice.

    ``all_satisfied`` is true iff every margin is ``>= -tol``. On the
    availability axis the precondition ``N f_i pi_i - psi_i >= 0`` is also
    checked and any failure is counted in ``precondition_violations``.
    """
    grid = grid or GridSpec()
    samples = _survey(axis, config, grid)
    ni, nj = _names(axis)
    rows = []
    pre_bad = 0
    for who, xi, xj, own, mx, _, factor in samples:
        margin = -own - abs(mx)
        row = {"who": who, ni: xi, nj: xj, "own_second": own, "mixed": mx, "margin": margin,
               "satisfied": int(margin >= -tol)}
        if axis == "availability":
            row["revenue_factor"] = factor
            pre_bad += int(factor < 0)
        rows.append(row)
    report = SolvabilityReport(axis, {"points": grid.points, "margin": grid.margin}, rows,
                               all(r["satisfied"] for r in rows), pre_bad)
    if pre_bad:
        report.notes.append("revenue factor N f_i pi_i - psi_i is negative; own-concavity in tau is not implied")
    return report
