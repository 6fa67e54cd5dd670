"""Command-line experiment runner.

Subcommands: ``solve-static``, ``sweep``, ``contract``, ``simulate``.
Settings come from an optional JSON config file whose sections are ``game``,
``sweep``, ``contract``, ``simulate`` and ``output``; command-line flags
override file values. Output is CSV (9 significant digits, ``#`` footer
lines) or JSON (an array of records).

Exit codes: 0 success, 2 usage or config error, 3 solver failure,
4 infeasible contract system.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys

import numpy as np

from .contracts import IC_MODES, ic_violations, make_type, n_type_optimal, verify_menu
from .model import AttackAction, GameParams, InvalidParameterError
from .repeated import REWARD_RULES, SimulationAborted, collector_accounting, simulate
from .static_game import REGRET_TOL, EquilibriumNotFound, solve_equilibrium

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_INFEASIBLE = 0, 2, 3, 4
SWEEP_PARAMS = ("attacker_reward", "p_background", "p_homog_same", "gamma")
GAME_FIELDS = [f for f in dataclasses.fields(GameParams) if f.name != "enforce_ordering"]


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# formatting

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "{:.9g}".format(float(x))
    return "" if x is None else str(x)


def _jsonable(x):
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def render(records: list[dict], columns: list[str], fmt: str, footer=()) -> str:
    if fmt == "json":
        out = [{c: _jsonable(r.get(c)) for c in columns} for r in records]
        return json.dumps(out, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in records:
        buf.write(",".join(_fmt(r.get(c)) for c in columns) + "\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _warning(regret: float) -> str:
    return "" if regret <= REGRET_TOL else "regret_above_tol"


# --------------------------------------------------------------------------
# configuration

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _game_params(cfg: dict, args) -> tuple[GameParams, float, float]:
    game = dict(cfg.get("game", {}))
    for f in GAME_FIELDS:
        v = getattr(args, f.name, None)
        if v is not None:
            game[f.name] = v
    low = float(_pick(args, "low_ratio", game.pop("low_ratio", 0.9)))
    high = float(_pick(args, "high_ratio", game.pop("high_ratio", 0.8)))
    value = _pick(args, "value", game.pop("value", None))
    unknown = set(game) - {f.name for f in GAME_FIELDS}
    if unknown:
        raise ConfigError(f"unknown game keys: {sorted(unknown)}")
    params = GameParams(**game)
    if value is not None:
        params = params.with_value(float(value), low, high)
    return params, low, high


def _pick(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


# --------------------------------------------------------------------------
# commands

EQ_COLUMNS = ["kind", "support", "p", "q_B", "q_H", "q_N",
              "E_u_org", "E_u_att", "regret", "warning"]


def _eq_record(eq) -> dict:
    return {"kind": eq.kind.value, "support": eq.support, "p": eq.org_p,
            "q_B": eq.q_B, "q_H": eq.q_H, "q_N": eq.q_N,
            "E_u_org": eq.expected_org_utility, "E_u_att": eq.expected_attacker_utility,
            "regret": eq.regret, "warning": _warning(eq.regret)}


def _report_failure(exc: EquilibriumNotFound) -> None:
    print(f"error: {exc}", file=sys.stderr)
    if exc.best is not None:
        b = exc.best
        print(f"best candidate: p={b.org_p:.9g} q={tuple(round(x, 9) for x in b.attacker_dist)}"
              f" regret={b.regret:.3g} support={b.support}", file=sys.stderr)


def cmd_solve_static(cfg, args) -> tuple[int, str]:
    params, _, _ = _game_params(cfg, args)
    try:
        eq = solve_equilibrium(params)
    except EquilibriumNotFound as exc:
        _report_failure(exc)
        return EXIT_SOLVER, ""
    rec = {"attacker_reward": params.attacker_reward, **_eq_record(eq)}
    return EXIT_OK, render([rec], ["attacker_reward"] + EQ_COLUMNS, args.format)


def cmd_sweep(cfg, args) -> tuple[int, str]:
    sweep = dict(cfg.get("sweep", {}))
    name = _pick(args, "parameter", sweep.get("parameter"))
    values = _pick(args, "values", sweep.get("values"))
    if name is None or values is None:
        raise ConfigError("sweep needs a parameter name and a list of values")
    if name not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {name!r}; choose one of {SWEEP_PARAMS}")
    params, low, high = _game_params(cfg, args)
    records = []
    status = EXIT_OK
    for v in _floats(values):
        if name == "attacker_reward":
            game = params.with_value(v, low, high)
        else:
            game = params.replace(**{name: v})
        try:
            eq = solve_equilibrium(game)
        except EquilibriumNotFound as exc:
            _report_failure(exc)
            status = EXIT_SOLVER
            break
        records.append({name: v, **_eq_record(eq)})
    return status, render(records, [name] + EQ_COLUMNS, args.format)


def _parse_types(spec) -> list[tuple[int, float]]:
    out = []
    if isinstance(spec, str):
        spec = [item.split(":") for item in spec.split(",") if item.strip()]
    for item in spec:
        if isinstance(item, dict):
            k, v = item["k"], item.get("valuation", 0.0)
        else:
            k, v = (item[0], item[1]) if len(item) > 1 else (item[0], 0.0)
        out.append((int(k), float(v)))
    return out


def cmd_contract(cfg, args) -> tuple[int, str]:
    section = dict(cfg.get("contract", {}))
    spec = _pick(args, "types", section.get("types"))
    if not spec:
        raise ConfigError("contract needs at least one (k, valuation) type")
    params = dict(cfg.get("game", {}))
    gamma = float(_pick(args, "gamma", params.get("gamma", 1.0)))
    v_size = float(_pick(args, "v_size", params.get("v_size", 10.0)))
    base = float(_pick(args, "log_base", params.get("log_base", 10.0)))
    ic = _pick(args, "ic", section.get("ic", "adjacent"))
    types = [make_type(k, gamma, v_size, base, v) for k, v in _parse_types(spec)]
    menu = n_type_optimal(types, ic=ic)
    if not menu.feasible:
        print("error: contract constraint system is infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE, ""
    matrix = verify_menu(menu)
    bad = ic_violations(matrix)
    n = len(types)
    cols = ["k", "theta", "valuation", "reward", "net_utility"] + [
        f"u_vs_k{e.type.k}" for e in menu.entries] + ["diagonal_max"]
    records = []
    for i, e in enumerate(menu.entries):
        rec = {"k": e.type.k, "theta": e.type.theta, "valuation": e.type.valuation,
               "reward": e.reward, "net_utility": e.org_net_utility,
               "diagonal_max": not any(a == i for a, _ in bad)}
        for j in range(n):
            rec[f"u_vs_k{menu.entries[j].type.k}"] = matrix[i, j]
        records.append(rec)
    footer = [f"principal_utility={_fmt(menu.principal_utility)}",
              f"ir={'pass' if menu.ir_ok() else 'fail'}",
              f"ic_diagonal_max={'pass' if not bad else 'fail'}",
              f"ic_mode={ic}"]
    return EXIT_OK, render(records, cols, args.format, footer)


SIM_COLUMNS = ["step", "gamma", "gamma_played", "value", "p", "q_B", "q_H", "q_N",
               "regret", "warning", "k_1", "k_2", "attack", "breach",
               "u_org_1", "u_org_2", "u_attacker", "collector_utility"]

_SCRIPTS = {"all-blocked": lambda n: [True] * n,
            "alternate": lambda n: [t % 2 == 1 for t in range(n)]}


def _outcomes(spec, horizon):
    if spec is None:
        return None
    if isinstance(spec, str):
        if spec in _SCRIPTS:
            return _SCRIPTS[spec](horizon)
        spec = [s.strip() for s in spec.split(",") if s.strip()]
    out = []
    for s in spec:
        if isinstance(s, bool):
            out.append(s)
        elif str(s).lower() in ("blocked", "b", "1", "true"):
            out.append(True)
        elif str(s).lower() in ("breached", "x", "0", "false"):
            out.append(False)
        else:
            raise ConfigError(f"unknown outcome {s!r}")
    return out


def cmd_simulate(cfg, args) -> tuple[int, str]:
    section = dict(cfg.get("simulate", {}))
    params, low, high = _game_params(cfg, args)
    horizon = int(_pick(args, "horizon", section.get("horizon", 50)))
    gamma0 = float(_pick(args, "gamma0", section.get("gamma0", 0.1)))
    seed = int(_pick(args, "seed", section.get("seed", cfg.get("seed", 0))))
    series = _pick(args, "value_series", section.get("value_series"))
    if series is None:
        const = _pick(args, "value", section.get("value", params.attacker_reward))
        series = [float(const)] * horizon
    series = _floats(series)
    rule = _pick(args, "reward_rule", section.get("reward_rule", "proportional"))
    override = _pick(args, "attack_override", section.get("attack_override"))
    outcomes = _outcomes(_pick(args, "outcomes", section.get("outcomes")), horizon)
    fraction = float(_pick(args, "offer_fraction", section.get("offer_fraction", 0.5)))

    status = EXIT_OK
    try:
        trace = simulate(params, horizon, gamma0, series, seed, rule, override,
                         outcomes, low, high)
    except SimulationAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        trace = exc.trace
        status = EXIT_SOLVER
    records = []
    for r in trace.rounds:
        eq = r.equilibrium
        records.append({
            "step": r.step, "gamma": r.gamma, "gamma_played": r.gamma_played,
            "value": r.value, "p": eq.org_p, "q_B": eq.q_B, "q_H": eq.q_H,
            "q_N": eq.q_N, "regret": eq.regret, "warning": _warning(eq.regret),
            "k_1": r.levels[0], "k_2": r.levels[1], "attack": r.attack_action.short,
            "breach": r.attack_succeeded, "u_org_1": r.org_realized_utility[0],
            "u_org_2": r.org_realized_utility[1],
            "u_attacker": r.attacker_realized_utility,
            "collector_utility": r.collector_utility})
    footer = []
    if trace.rounds:
        footer += [f"seed={seed}", "cumulative_collector_utility="
                   + _fmt(trace.cumulative_collector_utility)]
        for org in (0, 1):
            offer, acc = collector_accounting(trace, org, fraction)
            if offer is None:
                footer.append(f"org_{org + 1} long_term_offer=none")
                continue
            steps = " ".join(str(s) for s in sorted(offer.binding_steps))
            footer.append(
                f"org_{org + 1} binding_steps={steps} "
                f"per_step_minimum={_fmt(offer.per_step_minimum)} "
                f"missed_gain={_fmt(offer.missed_gain)} "
                f"baseline={_fmt(acc.baseline)} with_offer={_fmt(acc.with_offer)}")
    return status, render(records, SIM_COLUMNS, args.format, footer)


# --------------------------------------------------------------------------
# argument parsing

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON config file")
    p.add_argument("--output", default=d, help="write to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=d)
    p.add_argument("--seed", type=int, default=d)


def _game_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("game parameters")
    for f in GAME_FIELDS:
        kind = int if f.type in ("int", int) else float
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind)
    g.add_argument("--value", type=float,
                   help="dataset value: sets attacker reward and scales rewards")
    g.add_argument("--low-ratio", dest="low_ratio", type=float)
    g.add_argument("--high-ratio", dest="high_ratio", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anongame", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-static", help="solve one static game")
    _global_flags(p, True)
    _game_flags(p)

    p = sub.add_parser("sweep", help="solve the game across values of one parameter")
    _global_flags(p, True)
    _game_flags(p)
    p.add_argument("--parameter", choices=SWEEP_PARAMS)
    p.add_argument("--values", help="comma-separated values")

    p = sub.add_parser("contract", help="optimal reward menu and IC audit")
    _global_flags(p, True)
    p.add_argument("--types", help="comma-separated k:valuation pairs")
    p.add_argument("--gamma", type=float)
    p.add_argument("--v-size", dest="v_size", type=float)
    p.add_argument("--log-base", dest="log_base", type=float)
    p.add_argument("--ic", choices=IC_MODES)

    p = sub.add_parser("simulate", help="repeated game trace")
    _global_flags(p, True)
    _game_flags(p)
    p.add_argument("--horizon", type=int)
    p.add_argument("--gamma0", type=float)
    p.add_argument("--value-series", dest="value_series", help="comma-separated values")
    p.add_argument("--reward-rule", dest="reward_rule", choices=REWARD_RULES)
    p.add_argument("--attack-override", dest="attack_override",
                   choices=[a.short for a in AttackAction])
    p.add_argument("--outcomes", help="all-blocked, alternate, or a comma list of "
                                      "blocked/breached")
    p.add_argument("--offer-fraction", dest="offer_fraction", type=float)
    return parser


COMMANDS = {"solve-static": cmd_solve_static, "sweep": cmd_sweep,
            "contract": cmd_contract, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _load_config(args.config)
        out = dict(cfg.get("output", {}))
        args.format = args.format or out.get("format", "csv")
        if args.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {args.format!r}")
        path = args.output or out.get("path")
        status, text = COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidParameterError, TypeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if text:
        _emit(text, path)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
