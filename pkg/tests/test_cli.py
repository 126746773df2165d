import json
import math

import pytest

from uavgame.cli import CliError, main, parse_values
from uavgame.io import read_stamped_csv, shipped_config_path, shipped_configs

from conftest import game_doc


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def value_of(text, name):
    for line in text.splitlines():
        if line.startswith(name + " ="):
            return float(line.split("=", 1)[1])
    raise AssertionError(f"{name} not in output:\n{text}")


def test_probe_examples(capsys):
    code, out, _ = run(capsys, "probe", "beacon-prob", "--lambda", "1", "--tau", "1", "--T", "1", "--l", "100")
    assert code == 0
    assert f"{value_of(out, 'beacon-prob'):.12g}" == f"{-math.expm1(-100):.12g}"
    code, out, _ = run(capsys, "probe", "share", "--fi", "3", "--fj", "3", "--mu", "4")
    assert value_of(out, "share") == 0.5
    code, out, _ = run(capsys, "probe", "coverage", "--los", "const:1", "--snr-radius-ratio", "0.5")
    assert value_of(out, "coverage") == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("argv", [
    ("probe", "sleep-prob", "--lambda", "0.5", "--tau", "0.3", "--T", "1", "--l", "10"),
    ("probe", "encounter", "--lambda", "1", "--lambda-j", "2", "--T", "1", "--l", "3", "--order", "j_first"),
    ("probe", "coverage", "--los", "sigmoid:5,0.5", "--tx-power", "160000", "--noise-power", "1",
     "--sinr-threshold", "1", "--pathloss-exponent", "2", "--altitude", "100", "--radius", "500"),
    ("probe", "utility", "--tau", "0.5", "--fi", "3", "--tau-j", "0.5", "--fj", "3"),
    ("probe", "energy", "--tau", "0.2", "--who", "1"),
])
def test_probe_oracle(capsys, argv):
    code, out, _ = run(capsys, *argv, "--oracle")
    assert code == 0
    assert value_of(out, "abs_diff") <= 1e-7


def test_probe_errors(capsys):
    code, _, err = run(capsys, "probe", "beacon-prob", "--lambda", "1", "--tau", "2", "--T", "1", "--l", "5")
    assert code == 1 and "DomainError" in err
    code, _, err = run(capsys, "probe", "share", "--fi", "1")
    assert code == 2
    with pytest.raises(SystemExit) as e:
        main(["probe", "share", "--no-such-flag"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_bad_config_exit_code(tmp_path, capsys):
    doc = game_doc(mu=0.0)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", "--config", str(p), "--out", str(tmp_path))
    assert code == 1 and "temperature" in err


def test_parse_values():
    assert parse_values("2:6:0.5") == [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]
    assert parse_values("0.1:0.9:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert parse_values("50,100,200", integer=True) == [50, 100, 200]
    for bad in ("1:2", "2:1:0.5", "a,b", "1:2:0"):
        with pytest.raises(CliError):
            parse_values(bad)


def test_verify_default(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--out", str(tmp_path))
    assert "availability: submodular (0 violations)" in out
    # the pricing corner with f_i(1 - 2 pi_i) > mu breaks supermodularity on this box
    assert "pricing: indeterminate" in out
    assert code == 1
    rows = read_stamped_csv(tmp_path / "violations_modularity_pricing.csv")
    assert rows and all(float(r["bracket"]) < 0 for r in rows)
    assert (tmp_path / "modularity_availability.csv").read_text().startswith("# config_hash=")


def test_verify_precondition_flag(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--config", str(shipped_config_path("unprofitable")),
                       "--out", str(tmp_path), "--grid-points", "5")
    assert "precondition" in out


def test_verify_adversarial_exit(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--config", str(shipped_config_path("adversarial")),
                       "--out", str(tmp_path), "--grid-points", "9")
    assert code == 1 and (tmp_path / "violations_modularity_pricing.csv").exists()


def test_solve_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--out", str(tmp_path), "--seed", "3")
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    rows = read_stamped_csv(tmp_path / "trace.csv")
    assert len(rows) == summary["converged_at"]
    assert list(rows[0].keys()) == ["round", "tau_1", "f_1", "tau_2", "f_2", "u_1", "u_2", "residual"]
    assert summary["seed"] == 3 and summary["restarts"] == 5
    svg = (tmp_path / "trajectories.svg").read_text()
    assert svg.startswith("<svg") and "http://" not in svg.replace('xmlns="http://www.w3.org/2000/svg"', "")


def test_solve_low_temperature(tmp_path, capsys):
    doc = json.loads(shipped_config_path("fig3_4_mu").read_text())
    doc["market"]["temperature"] = 2.0
    p = tmp_path / "mu2.json"
    p.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "solve", "--config", str(p), "--out", str(tmp_path))
    s = json.loads((tmp_path / "summary.json").read_text())
    assert code == 0
    assert all(x["fee"] == 0.0 and x["beacon_duration"] == 0.0 for x in s["profile"])


def test_solve_nonconvergence_exit(tmp_path, capsys):
    doc = game_doc()
    doc["learning"] = {"max_iterations": 1}
    p = tmp_path / "short.json"
    p.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "solve", "--config", str(p), "--out", str(tmp_path))
    assert code == 3
    assert (tmp_path / "trace.csv").exists()
    assert len(read_stamped_csv(tmp_path / "trace.csv")) == 1


def test_sweep_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "pcov", "--values", "0.5,0.7,0.9", "--out", str(tmp_path))
    assert code == 0
    rows = read_stamped_csv(tmp_path / "sweep_pcov.csv")
    assert [float(r["value"]) for r in rows] == [0.5, 0.7, 0.9]
    assert list(rows[0].keys())[:6] == ["value", "tau_1", "f_1", "tau_2", "f_2", "converged_at"]
    assert (tmp_path / "sweep_pcov.svg").read_text().startswith("<svg")


def test_sweep_failures_recorded(tmp_path, capsys):
    doc = game_doc()
    doc["learning"] = {"max_iterations": 1}
    p = tmp_path / "short.json"
    p.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "sweep", "--config", str(p), "--axis", "mu", "--values", "3,4", "--out", str(tmp_path))
    assert code == 3
    assert all(r["converged_at"] == "" for r in read_stamped_csv(tmp_path / "sweep_mu.csv"))


def test_sweep_needs_axis(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--out", str(tmp_path))
    assert code == 2


def test_global_flags_before_subcommand(tmp_path, capsys):
    code, _, _ = run(capsys, "--out", str(tmp_path), "--seed", "1", "sweep", "--axis", "mu", "--values", "4")
    assert code == 0 and (tmp_path / "sweep_mu.csv").exists()


def test_shipped_configs_load():
    from uavgame.io import load_run

    names = shipped_configs()
    assert {"default", "fig3_4_mu", "fig5_6_pcov", "fig7_8_lambda", "fig9_population", "fig12_pcov",
            "adversarial", "unprofitable"} <= set(names)
    for n in names:
        load_run(shipped_config_path(n))
