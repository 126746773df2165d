import copy

import pytest

from uavgame.config import validate_config


def game_doc(mu=4.0, N=50, pcov=(0.8, 0.8), lam=(1.0, 1.0), eb=0.1, er=0.1, ea=0.1, es=0.1,
             fee_min=0.0, fee_max=10.0, probs=(0.5, 0.5), T=1.0, l=100, beacon_term="duty_cycle"):
    """The reference experiment document; every knob can be overridden."""
    pcov = pcov if isinstance(pcov, (tuple, list)) else (pcov, pcov)
    lam = lam if isinstance(lam, (tuple, list)) else (lam, lam)
    eb = eb if isinstance(eb, (tuple, list)) else (eb, eb)
    return {
        "timing": {"slot_period": T, "num_slots": l},
        "market": {"temperature": mu, "population_size": N, "fee_min": fee_min, "fee_max": fee_max,
                   "user_tx_probs": list(probs)},
        "uav": [
            {"encounter_rate": lam[k], "coverage": {"variant": "direct", "p_cov": pcov[k]},
             "energy": {"beacon_cost": eb[k], "rx_cost": er, "ack_cost": ea, "switch_cost": es,
                        "beacon_term": beacon_term}}
            for k in range(2)
        ],
    }


def make_config(**kw):
    return validate_config(game_doc(**kw))


@pytest.fixture
def doc():
    return copy.deepcopy(game_doc())


@pytest.fixture
def config():
    return make_config()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
