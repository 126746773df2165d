"""Command-line front-end: ``probe``, ``verify``, ``solve`` and ``sweep``.

Exit codes: 0 success, 1 domain error or a verdict contradicting the
claimed game property, 2 invalid flags, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

from . import analysis, oracles
from .config import (ConstantLos, ElevationSigmoidLos, RadioParams, Strategy, StrategyProfile,
                     TimingConfig, check_profile)
from .coverage import coverage_prob
from .exceptions import ConfigError, DomainError, UavGameError
from .io import csv_text, fmt, load_run, run_hash, shipped_config_path, stamp, write_text
from .learning import LearningConfig, run_dynamics, sweep_equilibria
from .market import Payoff, energy, logit_share, served_set_for, utility
from .svg import line_plot
from .temporal import EncounterPair, beacon_prob, first_encounter_prob, sleep_prob

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3
AXIS_NAMES = {"mu": "temperature", "pcov": "coverage", "population": "population", "lambda": "encounter_rate"}
SWEEP_PASS_FRACTION = 0.9
DEFAULT_CONFIG = "default"


class CliError(Exception):
    """Raised for unusable flag values; reported with exit code 2."""


# -- value parsing ------------------------------------------------------------


def parse_values(text: str, integer=False):
    """``start:end:step`` (end inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"range must be start:end:step, got {text!r}")
        a, b, step = (float(p) for p in parts)
        if not step > 0 or b < a:
            raise CliError(f"range needs step > 0 and end >= start, got {text!r}")
        n = int(math.floor((b - a) / step + 1e-9))
        # re-round so 0.1-style steps give the shortest decimal representation
        vals = [float(f"{a + k * step:.12g}") for k in range(n + 1)]
    else:
        try:
            vals = [float(p) for p in text.split(",") if p.strip()]
        except ValueError:
            raise CliError(f"could not parse values {text!r}") from None
    if not vals:
        raise CliError("no sweep values given")
    if integer:
        if any(v != int(v) for v in vals):
            raise CliError(f"population values must be integers, got {text!r}")
        vals = [int(v) for v in vals]
    return vals


def parse_los(text: str):
    kind, _, rest = text.partition(":")
    try:
        if kind in ("const", "constant"):
            return ConstantLos(float(rest or 1.0))
        if kind in ("sigmoid", "elevation_sigmoid"):
            a, b = (float(x) for x in rest.split(","))
            return ElevationSigmoidLos(a, b)
    except ValueError:
        pass
    raise CliError(f"--los expects const:P or sigmoid:A,B, got {text!r}")


# -- run setup ----------------------------------------------------------------


def _load(args):
    path = args.config or shipped_config_path(DEFAULT_CONFIG)
    config, lc, sweep = load_run(path)
    seed = args.seed if args.seed is not None else (config.seed if config.seed is not None else lc.seed)
    lc = replace(lc, seed=int(seed))
    return config, lc, sweep


def _out_dir(args) -> Path:
    return Path(args.out or ".")


def _profile_from_flags(args, config):
    base = config.default_profile()
    mine = Strategy(args.tau if args.tau is not None else base[0].beacon_duration,
                    args.fi if args.fi is not None else base[0].fee)
    theirs = Strategy(args.tau_j if args.tau_j is not None else base[1].beacon_duration,
                      args.fj if args.fj is not None else base[1].fee)
    return check_profile(StrategyProfile(mine, theirs) if args.who == 0 else StrategyProfile(theirs, mine), config)


# -- probe --------------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise CliError("missing flags: " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _timing(args):
    if not args.T > 0:
        raise DomainError(f"slot period must be > 0, got {args.T}")
    if args.l < 1:
        raise DomainError(f"number of slots must be >= 1, got {args.l}")
    return TimingConfig(args.T, args.l)


def _print_value(name, value, oracle=None):
    print(f"{name} = {value:.15g}")
    if oracle is not None:
        print(f"oracle = {oracle:.15g}")
        print(f"abs_diff = {abs(value - oracle):.3e}")


def cmd_probe(args) -> int:
    q = args.quantity
    if q in ("beacon-prob", "sleep-prob"):
        _need(args, "lam", "tau", "T", "l")
        timing = _timing(args)
        fn = beacon_prob if q == "beacon-prob" else sleep_prob
        ofn = oracles.beacon_prob if q == "beacon-prob" else oracles.sleep_prob
        value = fn(args.lam, args.tau, timing)
        _print_value(q, value, ofn(args.lam, args.tau, args.T, args.l) if args.oracle else None)
    elif q == "encounter":
        _need(args, "lam", "lam_j", "T", "l")
        _timing(args)
        pair = EncounterPair(args.lam, args.lam_j, args.T * args.l)
        value = first_encounter_prob(pair, args.order)
        li, lj = (args.lam, args.lam_j) if args.order == "i_first" else (args.lam_j, args.lam)
        _print_value(f"encounter[{args.order}]", value,
                     oracles.race_prob(li, lj, args.T * args.l) if args.oracle else None)
    elif q == "coverage":
        los = parse_los(args.los) if args.los else ConstantLos(1.0)
        if args.snr_radius_ratio is not None:
            ratio = args.snr_radius_ratio
            if not ratio > 0:
                raise DomainError(f"--snr-radius-ratio must be > 0, got {ratio}")
            # unit cell, free-space exponent 2: the SNR radius is sqrt(tx_power)
            radio = RadioParams(tx_power=ratio**2, noise_power=1.0, sinr_threshold=1.0, pathloss_exponent=2.0,
                                altitude=args.altitude, cell_radius=1.0, los_model=los)
        else:
            _need(args, "tx_power", "noise_power", "sinr_threshold", "pathloss_exponent", "radius")
            radio = RadioParams(args.tx_power, args.noise_power, args.sinr_threshold, args.pathloss_exponent,
                                args.altitude, args.radius, los)
        _check_radio(radio)
        _print_value("coverage", coverage_prob(radio), oracles.coverage_prob(radio) if args.oracle else None)
    elif q == "share":
        _need(args, "fi", "fj", "mu")
        if not args.mu > 0:
            raise CliError("--mu must be > 0")
        _print_value("share", logit_share(args.fi, args.fj, args.mu),
                     oracles.share(args.fi, args.fj, args.mu) if args.oracle else None)
    elif q in ("energy", "utility"):
        config, _, _ = _load(args)
        profile = _profile_from_flags(args, config)
        who = args.who
        if q == "utility":
            value = utility(profile, config, who)
            ref = oracles.utility(profile, config, who) if args.oracle else None
        else:
            pay = Payoff(config, who)
            me, rival = profile[who], profile[1 - who]
            p_srv = float(pay.service(me.beacon_duration, rival.beacon_duration))
            share = pay.share(me.fee, rival.fee)
            value = energy(served_set_for(config), config.uav[who].energy, p_srv, me.beacon_duration,
                           config.timing, share)
            ref = None
            if args.oracle:
                t = config.timing
                u_i, u_j = config.uav[who], config.uav[1 - who]
                p_ref = oracles.service_prob(me.beacon_duration, rival.beacon_duration, u_i.encounter_rate,
                                             u_j.encounter_rate, t.slot_period, t.num_slots, pay.p_cov)
                ref = oracles.energy(p_ref, me.beacon_duration, t.slot_period,
                                     oracles.share(me.fee, rival.fee, config.market.temperature),
                                     u_i.energy, config.market.user_tx_probs)
        _print_value(q, value, ref)
    return EXIT_OK


def _check_radio(radio: RadioParams):
    for name in ("tx_power", "noise_power", "sinr_threshold", "pathloss_exponent", "altitude", "cell_radius"):
        v = getattr(radio, name)
        if not v > 0:
            raise DomainError(f"{name} must be > 0, got {v}")


# -- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    config, lc, _ = _load(args)
    grid = analysis.GridSpec(args.grid_points, args.margin)
    h = run_hash(config)
    line = stamp(h, lc.seed)
    out = _out_dir(args)
    contradiction = False
    parts = []
    for axis in analysis.AXES:
        mod = analysis.check_modularity(axis, config, grid)
        sol = analysis.check_solvability(axis, config, grid)
        write_text(out / f"modularity_{axis}.csv", line + "\n" + mod.to_csv())
        write_text(out / f"solvability_{axis}.csv", line + "\n" + sol.to_csv())
        bad_mod = mod.verdict != analysis.CLAIMS[axis] or mod.violation_count > 0
        if bad_mod:
            write_text(out / f"violations_modularity_{axis}.csv",
                       line + "\n" + analysis._rows_to_csv(mod.violations))
        if not sol.all_satisfied:
            write_text(out / f"violations_solvability_{axis}.csv",
                       line + "\n" + analysis._rows_to_csv([s for s in sol.samples if not s["satisfied"]]))
        contradiction |= bad_mod or not sol.all_satisfied
        parts.append(mod.summary())
        print(sol.summary())
    print("; ".join(parts))
    return EXIT_DOMAIN if contradiction else EXIT_OK


# -- solve --------------------------------------------------------------------


TRACE_COLUMNS = ("round", "tau_1", "f_1", "tau_2", "f_2", "u_1", "u_2", "residual")


def trace_rows(trace):
    for r in trace.iterations:
        (t1, f1), (t2, f2) = r.profile
        yield (r.round, t1, f1, t2, f2, r.utilities[0], r.utilities[1], r.residual)


def _profile_dict(p):
    return [{"beacon_duration": s.beacon_duration, "fee": s.fee} for s in p]


def cmd_solve(args) -> int:
    config, lc, _ = _load(args)
    if args.restarts is not None:
        lc = replace(lc, restarts=args.restarts)
    h = run_hash(config, lc)
    line = stamp(h, lc.seed)
    out = _out_dir(args)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = run_dynamics(config, lc)
    elapsed = time.perf_counter() - t0
    trace = report.trace
    write_text(out / "trace.csv", csv_text(line, TRACE_COLUMNS, trace_rows(trace)))
    summary = {
        "config_hash": h,
        "seed": lc.seed,
        "converged": report.converged,
        "converged_at": trace.converged_at,
        "rounds": len(trace.iterations),
        "final_residual": trace.final_residual,
        "br_residual": report.br_residual,
        "cell_diameter": lc.cell_diameter,
        "profile": _profile_dict(report.profile),
        "restarts": lc.restarts,
        "restart_agreement": report.restart_agreement,
        "restart_profiles": [_profile_dict(p) for p in report.restart_profiles],
    }
    write_text(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    rounds = [r.round for r in trace.iterations]
    rows = list(trace_rows(trace))
    series = [("tau_1", rounds, [r[1] for r in rows]), ("tau_2", rounds, [r[3] for r in rows]),
              ("f_1 / fee_max", rounds, [r[2] / config.market.fee_max for r in rows]),
              ("f_2 / fee_max", rounds, [r[4] / config.market.fee_max for r in rows])]
    write_text(out / "trajectories.svg", line_plot(series, "Best-response trajectories", "round", "strategy"))
    (t1, f1), (t2, f2) = report.profile
    status = f"converged at round {trace.converged_at}" if report.converged else \
        f"NOT converged after {len(trace.iterations)} rounds"
    print(f"{status}; profile tau=({t1!r}, {t2!r}) fee=({f1!r}, {f2!r}); br_residual={report.br_residual:.3g}")
    if report.restart_agreement is not None:
        print(f"restart agreement over {lc.restarts} restarts: {report.restart_agreement:.3g} "
              f"(2 x cell diameter = {2 * lc.cell_diameter:.3g})")
    print(f"elapsed {elapsed:.2f} s")
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


# -- sweep --------------------------------------------------------------------


SWEEP_COLUMNS = ("value", "tau_1", "f_1", "tau_2", "f_2", "converged_at", "br_residual")


def sweep_table(config, lc, axis, values):
    """Run a sweep and return its CSV rows in axis order."""
    results = sweep_equilibria(config, AXIS_NAMES[axis], values, lc)
    rows = []
    for v, rep in results:
        (t1, f1), (t2, f2) = rep.profile
        rows.append((v, t1, f1, t2, f2, rep.trace.converged_at, rep.br_residual))
    return rows


def cmd_sweep(args) -> int:
    config, lc, section = _load(args)
    section = section or {}
    axis = args.axis or section.get("axis")
    values_text = args.values or section.get("values")
    if axis is None or values_text is None:
        raise CliError("sweep needs --axis and --values (or a 'sweep' section in the config)")
    if axis not in AXIS_NAMES:
        raise CliError(f"--axis must be one of {sorted(AXIS_NAMES)}, got {axis!r}")
    if isinstance(values_text, list):
        values_text = ",".join(str(v) for v in values_text)
    values = parse_values(str(values_text), integer=axis == "population")
    h = run_hash(config, lc)
    line = stamp(h, lc.seed)
    out = _out_dir(args)
    rows = sweep_table(config, lc, axis, values)
    write_text(out / f"sweep_{axis}.csv", csv_text(line, SWEEP_COLUMNS, rows))
    xs = [r[0] for r in rows]
    fmax = config.market.fee_max
    series = [("tau_1", xs, [r[1] for r in rows]), ("tau_2", xs, [r[3] for r in rows]),
              ("f_1 / fee_max", xs, [r[2] / fmax for r in rows]), ("f_2 / fee_max", xs, [r[4] / fmax for r in rows])]
    write_text(out / f"sweep_{axis}.svg", line_plot(series, f"Equilibrium vs {axis}", axis, "NE coordinate"))
    converged = sum(1 for r in rows if r[5] is not None)
    for r in rows:
        print(f"{axis}={fmt(r[0])} tau=({r[1]:.6g}, {r[3]:.6g}) fee=({r[2]:.6g}, {r[4]:.6g}) "
              f"converged_at={fmt(r[5]) or '-'}")
    print(f"{converged}/{len(rows)} points converged")
    return EXIT_OK if converged >= SWEEP_PASS_FRACTION * len(rows) else EXIT_NONCONVERGED


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="run config JSON (default: shipped default)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for random initial profiles")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: .)")
    common.add_argument("--oracle", action="store_true", default=argparse.SUPPRESS,
                        help="also print independent oracle values (probe)")

    p = argparse.ArgumentParser(prog="uavgame", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("probe", parents=[common], help="evaluate one model quantity")
    pr.add_argument("quantity", choices=["beacon-prob", "sleep-prob", "encounter", "coverage", "share",
                                         "energy", "utility"])
    pr.add_argument("--lambda", dest="lam", type=float)
    pr.add_argument("--lambda-j", dest="lam_j", type=float)
    pr.add_argument("--order", choices=["i_first", "j_first"], default="i_first")
    pr.add_argument("--tau", type=float)
    pr.add_argument("--tau-j", type=float)
    pr.add_argument("--T", type=float)
    pr.add_argument("--l", type=int)
    pr.add_argument("--fi", type=float)
    pr.add_argument("--fj", type=float)
    pr.add_argument("--mu", type=float)
    pr.add_argument("--who", type=int, choices=[0, 1], default=0)
    pr.add_argument("--los")
    pr.add_argument("--snr-radius-ratio", type=float)
    pr.add_argument("--tx-power", type=float)
    pr.add_argument("--noise-power", type=float)
    pr.add_argument("--sinr-threshold", type=float)
    pr.add_argument("--pathloss-exponent", type=float)
    pr.add_argument("--altitude", type=float, default=1.0)
    pr.add_argument("--radius", type=float)

    ve = sub.add_parser("verify", parents=[common], help="modularity and dominance-solvability surveys")
    ve.add_argument("--grid-points", type=int, default=25)
    ve.add_argument("--margin", type=float, default=0.05)

    so = sub.add_parser("solve", parents=[common], help="run best-response dynamics")
    so.add_argument("--restarts", type=int)

    sw = sub.add_parser("sweep", parents=[common], help="equilibria along one parameter axis")
    sw.add_argument("--axis", choices=sorted(AXIS_NAMES))
    sw.add_argument("--values")
    return p


COMMANDS = {"probe": cmd_probe, "verify": cmd_verify, "solve": cmd_solve, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("seed", None), ("out", None), ("oracle", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UavGameError, ValueError, ArithmeticError, IndexError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
