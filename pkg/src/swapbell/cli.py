"""Command-line front end.

Subcommands::

    bell          evaluate one experiment (or optimize it) and report
                  the Bell value, P(C), and the full correlator table
    sweep         sweep one axis (r or a noise parameter), writing a CSV
                  and a PNG figure next to it
    optimize      maximize the Bell value over (r, m0, m1)
    polytope      test an outcome distribution for membership in the
                  local polytope, optionally scanning every subgroup
    oracle-check  compare the Gaussian pipeline against the exact
                  truncated-Fock reference at two parties
    to-km         convert a channel transmission to fiber length

Configuration is a flat ``key = value`` text file with dotted sections
(``noise.eta_p = 0.9``); command-line ``--set key=value`` pairs override
file values.  Unknown keys are rejected.  Exit codes: 0 success, 2 for
configuration errors, 3 for numerical failures.
"""

import argparse
import math
import sys

import numpy as np

from .bell import bell_value, evaluate_point
from .exceptions import InvalidArgument, SimulationError
from .fock import FockExperiment, tmsv_truncation_error
from .herald import herald_swap
from .measurement import plan_from_noise
from .network import SqueezerBank, fold_detector_efficiency, prepared_state
from .optimize import (
    NOISE_AXES,
    OptimizationProblem,
    optimize,
    sweep_bell_vs_r,
    sweep_noise,
)
from .params import NoiseConfig
from .polytope import lhv_feasible, subgroup_scan
from .probabilities import OutcomeTable, build_outcome_table

CONFIG_DEFAULTS = {
    "n": "2",
    "r": "optimize",
    "m0": "optimize",
    "m1": "optimize",
    "phases": "",
    "mode": "collinear",
    "grid_resolution": "11",
    "output": "",
    "plot": "true",
    "reoptimize": "false",
    "noise.eta_p": "0.9",
    "noise.eta_s": "0.2",
    "noise.eta_d": "1.0",
    "noise.p_dark_s": "1e-4",
    "noise.p_dark_p": "1e-4",
    "noise.sigma_a": "0.03",
    "noise.sigma_theta": "0.1",
    "sweep.axis": "",
    "sweep.grid": "",
    "sweep.start": "",
    "sweep.stop": "",
    "sweep.points": "",
    "sweep.log": "false",
    "polytope.table": "",
    "polytope.subgroups": "false",
    "oracle.cutoff": "6",
}


class ConfigError(Exception):
    """Raised for malformed or unknown configuration input."""


def parse_config_file(path):
    """Read a flat key = value file; '#' starts a comment."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in CONFIG_DEFAULTS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return values


def load_config(args):
    """Merge defaults, config file, and --set overrides (in that order)."""
    config = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        config.update(parse_config_file(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in CONFIG_DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
        config[key] = value.strip()
    return config


def _as_float(config, key):
    try:
        return float(config[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {config[key]!r}") from exc


def _as_int(config, key):
    try:
        return int(config[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {config[key]!r}") from exc


def _as_bool(config, key):
    value = config[key].lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {config[key]!r}")


def noise_from_config(config):
    try:
        return NoiseConfig(
            eta_p=_as_float(config, "noise.eta_p"),
            eta_s=_as_float(config, "noise.eta_s"),
            eta_d=_as_float(config, "noise.eta_d"),
            p_dark_s=_as_float(config, "noise.p_dark_s"),
            p_dark_p=_as_float(config, "noise.p_dark_p"),
            sigma_a=_as_float(config, "noise.sigma_a"),
            sigma_theta=_as_float(config, "noise.sigma_theta"),
        )
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc


def phases_from_config(config, n_parties):
    text = config["phases"].strip()
    if not text:
        return (0.0,) * n_parties
    try:
        phases = tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"phases must be comma-separated numbers: {text!r}") from exc
    if len(phases) != n_parties:
        raise ConfigError(f"expected {n_parties} phases, got {len(phases)}")
    return phases


def problem_from_config(config):
    return OptimizationProblem(
        n_parties=_as_int(config, "n"),
        noise=noise_from_config(config),
        mode=config["mode"],
        phases=phases_from_config(config, _as_int(config, "n")),
        grid_resolution=_as_int(config, "grid_resolution"),
    )


def resolve_point(config):
    """(r, m0, m1) from the config, optimizing any field set to 'optimize'."""
    wants_opt = any(config[key] == "optimize" for key in ("r", "m0", "m1"))
    if wants_opt:
        result = optimize(problem_from_config(config))
        point = [result.r, result.m0, result.m1]
    else:
        point = [0.0, 0.0, 0.0]
    for slot, key in enumerate(("r", "m0", "m1")):
        if config[key] != "optimize":
            point[slot] = _as_float(config, key)
    return tuple(point)


def fmt(value):
    """Decimal text with 12 significant digits (stable across runs)."""
    return format(float(value), ".12g")


def sweep_grid(config):
    text = config["sweep.grid"].strip()
    if text:
        try:
            return [float(tok) for tok in text.split(",")]
        except ValueError as exc:
            raise ConfigError(f"sweep.grid must be numbers: {text!r}") from exc
    if config["sweep.start"] and config["sweep.stop"] and config["sweep.points"]:
        start = _as_float(config, "sweep.start")
        stop = _as_float(config, "sweep.stop")
        points = _as_int(config, "sweep.points")
        if points < 1:
            raise ConfigError("sweep.points must be positive")
        if _as_bool(config, "sweep.log"):
            if start <= 0 or stop <= 0:
                raise ConfigError("log grid endpoints must be positive")
            return list(np.geomspace(start, stop, points))
        return list(np.linspace(start, stop, points))
    raise ConfigError("sweep needs sweep.grid or sweep.start/stop/points")


def write_sweep_csv(path, axis, n_parties, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("axis,value,N,bell,p_success\n")
        for value, bell, p_success in rows:
            handle.write(
                f"{axis},{fmt(value)},{n_parties},{fmt(bell)},{fmt(p_success)}\n"
            )


def save_outcome_table(table, path):
    """Outcome-table CSV: one row per (settings, outcomes) pair."""
    size = 1 << table.n_parties
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("n,g,probability\n")
        for n_idx in range(size):
            for g_idx in range(size):
                handle.write(f"{n_idx},{g_idx},{fmt(table.probs[n_idx, g_idx])}\n")


def load_outcome_table(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            header = handle.readline().strip()
            if header != "n,g,probability":
                raise ConfigError(f"{path}: expected header 'n,g,probability'")
            rows = []
            for lineno, line in enumerate(handle, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 3:
                    raise ConfigError(f"{path}:{lineno}: expected 3 columns")
                rows.append((int(parts[0]), int(parts[1]), float(parts[2])))
    except OSError as exc:
        raise ConfigError(f"cannot read table: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed row: {exc}") from exc
    count = len(rows)
    n_parties = round(math.log(count, 4)) if count else 0
    if count == 0 or 4 ** n_parties != count:
        raise ConfigError(f"{path}: row count {count} is not 4^N")
    size = 1 << n_parties
    probs = np.zeros((size, size))
    seen = np.zeros((size, size), dtype=bool)
    for n_idx, g_idx, prob in rows:
        if not (0 <= n_idx < size and 0 <= g_idx < size):
            raise ConfigError(f"{path}: index ({n_idx},{g_idx}) out of range")
        if seen[n_idx, g_idx]:
            raise ConfigError(f"{path}: duplicate row ({n_idx},{g_idx})")
        seen[n_idx, g_idx] = True
        probs[n_idx, g_idx] = prob
    if not seen.all():
        raise ConfigError(f"{path}: missing rows")
    return OutcomeTable(probs=probs, n_parties=n_parties)


def build_table(config, point):
    """Outcome table for the configured experiment at the given point."""
    n_parties = _as_int(config, "n")
    noise = noise_from_config(config)
    phases = phases_from_config(config, n_parties)
    plan = plan_from_noise(point[1], point[2], phases, noise)
    noise, plan = fold_detector_efficiency(noise, plan)
    bank = SqueezerBank(r=point[0], phases=phases, n_parties=n_parties)
    heralded = herald_swap(prepared_state(bank, noise), noise.p_dark_s)
    return build_outcome_table(heralded, plan)


def transmission_to_km(eta, loss_db_per_km=0.3):
    """Fiber length whose loss (in dB) matches the given transmission."""
    if not 0.0 < eta <= 1.0:
        raise InvalidArgument("transmission must be in (0, 1]")
    if loss_db_per_km <= 0:
        raise InvalidArgument("fiber loss must be positive")
    return -10.0 * math.log10(eta) / loss_db_per_km


def cmd_bell(args):
    config = load_config(args)
    n_parties = _as_int(config, "n")
    point = resolve_point(config)
    noise = noise_from_config(config)
    phases = phases_from_config(config, n_parties)
    result = evaluate_point(n_parties, *point, noise, phases=phases)
    print(f"parties        : {n_parties}")
    print(f"r, m0, m1      : {fmt(point[0])}, {fmt(point[1])}, {fmt(point[2])}")
    print(f"bell           : {fmt(result.bell)}")
    print(f"p_success      : {fmt(result.p_success)}")
    for n_idx, value in enumerate(result.correlators):
        bits = format(n_idx, f"0{n_parties}b")[::-1]
        print(f"correlator[{bits}]: {fmt(value)}")
    if config["output"]:
        base = config["output"]
        with open(base + ".csv", "w", encoding="utf-8", newline="\n") as handle:
            handle.write("axis,value,N,bell,p_success"
                         + "".join(f",correlator_{i}" for i in range(len(result.correlators)))
                         + "\n")
            handle.write(
                f"r,{fmt(point[0])},{n_parties},{fmt(result.bell)},{fmt(result.p_success)}"
                + "".join(f",{fmt(c)}" for c in result.correlators) + "\n"
            )
        if _as_bool(config, "plot"):
            from .plots import plot_correlators

            plot_correlators(result.correlators, n_parties, base + ".png")
        print(f"wrote {base}.csv")
    return 0


def cmd_optimize(args):
    config = load_config(args)
    result = optimize(problem_from_config(config))
    print(f"r*        : {fmt(result.r)}")
    print(f"m0*       : {fmt(result.m0)}")
    print(f"m1*       : {fmt(result.m1)}")
    print(f"bell*     : {fmt(result.bell)}")
    print(f"p_success : {fmt(result.p_success)}")
    if result.settings is not None:
        print(f"settings  : {result.settings.tolist()}")
    return 0


def cmd_sweep(args):
    config = load_config(args)
    axis = config["sweep.axis"]
    if not axis:
        raise ConfigError("sweep.axis is required")
    if axis != "r" and axis not in NOISE_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    grid = sweep_grid(config)
    if not grid:
        raise ConfigError("sweep grid is empty")
    problem = problem_from_config(config)
    if axis == "r":
        rows = sweep_bell_vs_r(problem, grid)
    else:
        base_point = None
        if all(config[key] != "optimize" for key in ("r", "m0", "m1")):
            base_point = resolve_point(config)
        rows = sweep_noise(
            problem, axis, grid,
            reoptimize=_as_bool(config, "reoptimize"),
            base_point=base_point,
        )
    out = config["output"] or f"sweep_{axis}.csv"
    if not out.endswith(".csv"):
        out += ".csv"
    write_sweep_csv(out, axis, problem.n_parties, rows)
    print(f"wrote {out}")
    if _as_bool(config, "plot"):
        from .plots import plot_sweep

        png = out[:-4] + ".png"
        plot_sweep(rows, axis, problem.n_parties, png,
                   log_x=_as_bool(config, "sweep.log"))
        print(f"wrote {png}")
    return 0


def cmd_polytope(args):
    config = load_config(args)
    if config["polytope.table"]:
        table = load_outcome_table(config["polytope.table"])
        print(f"loaded table: {table.n_parties} parties "
              f"(normalization defect {fmt(table.normalization_defect())})")
    else:
        point = resolve_point(config)
        table = build_table(config, point)
        print(f"built table: {table.n_parties} parties at "
              f"r={fmt(point[0])}, m0={fmt(point[1])}, m1={fmt(point[2])}")
        print(f"bell: {fmt(bell_value(table.correlators()))}")
    verdict = lhv_feasible(table)
    status = "INSIDE" if verdict.feasible else "OUTSIDE"
    print(f"full table: {status} the local polytope "
          f"(infeasibility gap {fmt(verdict.infeasibility_gap)})")
    if config["output"]:
        save_outcome_table(table, config["output"])
        print(f"wrote {config['output']}")
    if _as_bool(config, "polytope.subgroups"):
        for subset, result in subgroup_scan(table).items():
            status = "inside" if result.feasible else "OUTSIDE"
            print(f"subgroup {list(subset)}: {status} "
                  f"(gap {fmt(result.infeasibility_gap)})")
    return 0


ORACLE_CASES = [
    # (r, eta_p, eta_s, p_dark, tolerance)
    (r, 1.0, 1.0, 0.0, 1e-8) for r in (0.05, 0.1, 0.15)
] + [
    (r, 0.9, 0.2, 1e-4, 1e-6) for r in (0.05, 0.1, 0.15)
]


def cmd_oracle_check(args):
    config = load_config(args)
    cutoff = _as_int(config, "oracle.cutoff")
    worst = 0.0
    failed = False
    m0, m1 = 0.59, -0.18
    for r, eta_p, eta_s, p_dark, tol in ORACLE_CASES:
        noise = NoiseConfig(eta_p=eta_p, eta_s=eta_s, p_dark_s=p_dark,
                            p_dark_p=p_dark, sigma_a=0.0, sigma_theta=0.0)
        bank = SqueezerBank.symmetric(r, 2)
        plan = plan_from_noise(m0, m1, (0.0, 0.0), noise)
        heralded = herald_swap(prepared_state(bank, noise), noise.p_dark_s)
        table = build_outcome_table(heralded, plan)

        oracle = FockExperiment(n_parties=2, cutoff=cutoff)
        rho = oracle.network_density(bank, eta_p=eta_p, eta_s=eta_s)
        rho_c, p_success = oracle.herald(rho, p_dark)

        devs = [abs(p_success - heralded.p_success)]
        for n_idx in range(4):
            settings = (n_idx & 1, (n_idx >> 1) & 1)
            gauss = table.correlators()[n_idx]
            devs.append(abs(oracle.correlator(rho_c, plan, settings) - gauss))
            for g_idx in range(4):
                outcomes = (g_idx & 1, (g_idx >> 1) & 1)
                fock = oracle.outcome_probability(rho_c, plan, outcomes, settings)
                devs.append(abs(fock - table.probs[n_idx, g_idx]))
        deviation = max(devs)
        worst = max(worst, deviation)
        ok = deviation <= tol
        failed = failed or not ok
        print(f"r={r} eta_p={eta_p} eta_s={eta_s} p_dark={p_dark}: "
              f"max deviation {deviation:.3e} (tol {tol:.0e}) "
              f"{'ok' if ok else 'FAIL'}")
    print(f"overall max deviation: {worst:.3e} "
          f"(truncation bound {tmsv_truncation_error(0.15, cutoff):.1e})")
    if failed:
        raise SimulationError("oracle check failed")
    print("oracle check passed")
    return 0


def cmd_to_km(args):
    km = transmission_to_km(args.eta, args.loss_db_per_km)
    print(f"{fmt(km)} km")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="swapbell",
        description="Bell-inequality simulator for optical entanglement swapping",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key (repeatable)")

    common(sub.add_parser("bell", help="evaluate one experiment"))
    common(sub.add_parser("optimize", help="maximize the Bell value"))
    common(sub.add_parser("sweep", help="sweep one parameter axis"))
    common(sub.add_parser("polytope", help="local-polytope membership"))
    common(sub.add_parser("oracle-check", help="Fock-space cross-validation"))
    to_km = sub.add_parser("to-km", help="transmission to fiber length")
    to_km.add_argument("eta", type=float, help="channel transmission in (0, 1]")
    to_km.add_argument("--loss-db-per-km", type=float, default=0.3)
    return parser


HANDLERS = {
    "bell": cmd_bell,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "polytope": cmd_polytope,
    "oracle-check": cmd_oracle_check,
    "to-km": cmd_to_km,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except (ConfigError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
