import warnings

import numpy as np
import pytest
from sklearn.base import clone

from uavgame.config import Strategy, StrategyProfile
from uavgame.exceptions import DomainError, NonConvergenceWarning
from uavgame.learning import (BestResponseDynamics, LearningConfig, best_response, br_residual,
                              partial_best_response, profile_distance, restart_inits, run_dynamics,
                              strategy_distance, sweep_equilibria, with_axis_value)
from uavgame.market import Payoff

from conftest import make_config

LC = LearningConfig()


def test_learning_config_validation():
    for bad in ({"max_iterations": 0}, {"grid_resolution": 4}, {"fp_tolerance": 0.0},
                {"update_mode": "async"}, {"restarts": 0}):
        with pytest.raises(DomainError):
            LearningConfig(**bad)
    assert LC.cell_width == pytest.approx(1 / (63 * 64))
    assert LC.tolerance == LC.cell_diameter == pytest.approx(2**0.5 / (63 * 64))
    assert LearningConfig(fp_tolerance=1e-3).tolerance == 1e-3
    with pytest.raises(DomainError):
        LearningConfig.from_dict({"bogus": 1})


def test_best_response_without_coverage_saves_energy():
    cfg = make_config(pcov=(0.0, 0.8))
    br = best_response(0, Strategy(0.5, 5.0), cfg, LC)
    assert br == Strategy(0.0, 0.0)


def test_best_response_low_temperature_high_beacon_cost():
    cfg = make_config(mu=2.0, eb=135.0)
    br = best_response(0, Strategy(0.5, 5.0), cfg, LC)
    assert br.fee == cfg.market.fee_min and br.beacon_duration == 0.0


def test_fee_best_response_first_order_condition():
    # with tau fixed the fee optimum solves f (1 - pi(f, f_j)) = mu whenever it is interior
    cfg = make_config()
    f = partial_best_response(0, Strategy(0.5, 6.0), 0.5, "pricing", cfg, LC)
    pay = Payoff(cfg, 0)
    assert f * (1 - pay.share(f, 6.0)) == pytest.approx(4.0, abs=5e-3)


def dense_fixed_point(cfg, n=256, rounds=60):
    """Independent oracle: iterate best responses on a plain n x n grid, no refinement."""
    taus = np.linspace(0, cfg.timing.slot_period, n)
    fees = np.linspace(cfg.market.fee_min, cfg.market.fee_max, n)
    pays = [Payoff(cfg, k) for k in range(2)]
    prof = [(0.5, 5.0), (0.5, 5.0)]
    for _ in range(rounds):
        new = []
        for k in range(2):
            u = pays[k](taus[:, None], fees[None, :], *prof[1 - k])
            i, j = np.unravel_index(np.argmax(u), u.shape)
            new.append((float(taus[i]), float(fees[j])))
        if new == prof:
            break
        prof = new
    return prof


def test_default_equilibrium_matches_dense_grid_oracle(config):
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonConvergenceWarning)
        rep = run_dynamics(config, LC)
    oracle = dense_fixed_point(config)
    for k in range(2):
        assert strategy_distance(rep.profile[k], Strategy(*oracle[k]), config) <= 2**0.5 / 255 + LC.cell_diameter
    assert rep.br_residual < 2 * LC.cell_diameter
    assert rep.converged and rep.trace.converged_at <= 100


def test_init_at_fixed_point_converges_in_one_round(config):
    rep = run_dynamics(config, LC)
    again = run_dynamics(config, LC, init=rep.profile)
    assert again.trace.converged_at == 1
    assert again.trace.final_residual < LC.tolerance


def test_restarts_agree(config):
    lc = LearningConfig(restarts=5, seed=11)
    rep = run_dynamics(config, lc)
    assert rep.restart_agreement is not None and rep.restart_agreement <= 2 * lc.cell_diameter
    assert len(rep.restart_profiles) == 5
    assert run_dynamics(config, LC).restart_agreement is None


def test_symmetric_rounds_are_exactly_symmetric(config):
    init = StrategyProfile(Strategy(0.3, 2.0), Strategy(0.3, 2.0))
    rep = run_dynamics(config, LC, init)
    for row in rep.trace.iterations:
        assert row.profile[0] == row.profile[1]
        assert row.utilities[0] == row.utilities[1]


def test_determinism():
    cfg = make_config(lam=(1.0, 2.0), eb=60.0)
    lc = LearningConfig(restarts=3, seed=5, update_mode="sequential")
    a, b = run_dynamics(cfg, lc), run_dynamics(cfg, lc)
    assert [r.profile for r in a.trace.iterations] == [r.profile for r in b.trace.iterations]
    assert a.restart_profiles == b.restart_profiles
    assert restart_inits(cfg, lc, 3) == restart_inits(cfg, lc, 3)


def test_non_convergence_is_reported(config):
    lc = LearningConfig(max_iterations=1, seed=3)
    with pytest.warns(NonConvergenceWarning):
        rep = run_dynamics(config, lc)
    assert rep.trace.converged_at is None and len(rep.trace.iterations) == 1


def test_trace_rows_and_residuals(config):
    rep = run_dynamics(config, LC)
    rows = rep.trace.iterations
    assert [r.round for r in rows] == list(range(1, len(rows) + 1))
    prev = rep.trace.init
    for r in rows:
        assert r.residual == profile_distance(r.profile, prev, config)
        prev = r.profile


def test_availability_best_response_nonincreasing_in_rival_tau():
    cfg = make_config(eb=60.0)
    out = [partial_best_response(0, Strategy(tj, 6.0), 6.0, "availability", cfg, LC)
           for tj in np.linspace(0, 1, 21)]
    assert all(b <= a + LC.cell_width for a, b in zip(out, out[1:]))
    assert out[0] > out[-1]


def test_pricing_best_response_nondecreasing_in_rival_fee(config):
    out = [partial_best_response(0, Strategy(0.5, fj), 0.5, "pricing", config, LC)
           for fj in np.linspace(0, 10, 21)]
    assert all(b >= a - LC.cell_width * 10 for a, b in zip(out, out[1:]))
    assert out[-1] > out[0]


def test_sweep_order_and_independence(config):
    res = sweep_equilibria(config, "temperature", [2.0, 3.0, 4.0], LC)
    assert [v for v, _ in res] == [2.0, 3.0, 4.0]
    single = run_dynamics(with_axis_value(config, "temperature", 3.0), LC)
    assert res[1][1].profile == single.profile


def test_with_axis_value():
    cfg = make_config()
    assert with_axis_value(cfg, "coverage", (0.5, 0.9)).uav[1].coverage.p_cov == 0.9
    assert with_axis_value(cfg, "encounter_rate", 2.5).uav[0].encounter_rate == 2.5
    assert with_axis_value(cfg, "population", 200).market.population_size == 200
    for axis, bad in (("temperature", 0.0), ("coverage", 1.5), ("population", 2.5), ("bogus", 1.0)):
        with pytest.raises(DomainError):
            with_axis_value(cfg, axis, bad)


def test_estimator_surface(config):
    est = BestResponseDynamics(restarts=2, seed=4)
    assert est.get_params()["restarts"] == 2
    est2 = clone(est).set_params(update_mode="sequential")
    assert est2.update_mode == "sequential" and est.update_mode == "simultaneous"
    est.fit(config)
    assert est.converged_ and est.n_iter_ == len(est.trace_.iterations)
    br = est.predict([[0.5, 5.0], [1.0, 8.0]], who=1)
    assert br.shape == (2, 2)
    assert tuple(br[1]) == best_response(1, Strategy(1.0, 8.0), config, est.learning_config())
    assert np.all(np.abs(br_residual(est.profile_, config, est.learning_config())) < 2 * LC.cell_diameter)
    with pytest.raises(TypeError):
        BestResponseDynamics().fit({"not": "a config"})
