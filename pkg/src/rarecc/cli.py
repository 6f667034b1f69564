"""Batch command-line interface.

Subcommands::

    rarecc lt-limit    cfg.json            solve the light-tail limit program
    rarecc ht-limit    cfg.json            solve the heavy-tail limit program
    rarecc oracle      cfg.json            Monte Carlo chance-constrained oracle
    rarecc cvar        cfg.json            sample-average CVaR relaxation
    rarecc scenario    cfg.json            sampled-constraint program
    rarecc sample-size cfg.json            published scenario-count rule
    rarecc experiment  cfg.json --out r.csv   run a configured experiment

Exit codes: 0 success, 2 bad configuration, 1 runtime or solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import ParameterError, RareccError
from .experiments import ExperimentConfig, run_experiment, write_report
from .limits import RateFunction, solve_ht_limit, solve_lt_limit
from .methods import ccp_oracle, cvar_solve, sample_size_rule, scenario_solve
from .model import ProblemInstance
from .sampler import HeavyTailModel, LightTailModel, sample_tail


class ConfigError(Exception):
    """Configuration could not be loaded or validated."""


def _tail_from_dict(data: dict, n: int):
    kind = data.get("kind")
    if kind == "light":
        theta = data.get("theta", 1.0)
        if isinstance(theta, str):
            theta = math.inf if theta.lower() in ("inf", "infinity") else float(theta)
        return LightTailModel(n=n, beta=float(data["beta"]), theta=float(theta))
    if kind == "heavy":
        atoms = data.get("atoms")
        if atoms is None and n == 1:
            atoms = [[1.0, [1.0]]]
        if atoms is None:
            raise KeyError("'atoms'")
        return HeavyTailModel.from_pairs(n=n, alpha=float(data["alpha"]), pairs=atoms)
    raise ParameterError(f"tail kind must be 'light' or 'heavy', got {kind!r}")


def load_config(path: str) -> dict:
    """Parse the JSON config into model objects; raises ConfigError on any defect."""
    try:
        with open(path, "r") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    try:
        problem = ProblemInstance.from_dict(raw["problem"])
        tail = _tail_from_dict(raw["tail"], problem.n)
        exp = dict(raw.get("experiment", {}))
        return {
            "problem": problem,
            "tail": tail,
            "experiment": exp,
            "master_seed": int(raw.get("master_seed", 0)),
            "out": raw.get("out"),
            "workers": int(raw.get("workers", 1)),
        }
    except (KeyError, ValueError, TypeError, RareccError) as exc:
        raise ConfigError(f"config file {path} is invalid: {exc}") from exc


def _experiment_config(cfg: dict, args) -> ExperimentConfig:
    exp = cfg["experiment"]
    try:
        kind = exp["kind"]
    except KeyError as exc:
        raise ConfigError(f"experiment config missing key {exc}") from exc
    reps = args.reps if args.reps is not None else int(exp.get("replications", 1))
    seed = args.seed if args.seed is not None else cfg["master_seed"]
    y_probe = exp.get("y_probe")
    return ExperimentConfig(
        kind=kind,
        problem=cfg["problem"],
        tail=cfg["tail"],
        delta_grid=tuple(exp.get("delta_grid", (1e-2, 1e-3, 1e-4))),
        k_grid=tuple(int(k) for k in exp.get("k_grid", (10 ** 3, 10 ** 4, 10 ** 5))),
        replications=reps,
        budget=int(exp.get("budget", 100_000)),
        master_seed=seed,
        eta=float(exp.get("eta", 0.0)),
        r_grid=tuple(exp.get("r_grid", (10.0, 100.0))),
        y_probe=None if y_probe is None else np.asarray(y_probe, dtype=float),
        workers=args.workers if args.workers is not None else cfg["workers"],
        out=args.out or cfg["out"],
    )


def _emit(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text + "\n")


def _single_method(cfg: dict, args):
    exp = cfg["experiment"]
    seed = args.seed if args.seed is not None else cfg["master_seed"]
    delta = float(exp.get("delta_grid", [1e-3])[0])
    budget = int(exp.get("budget", 100_000))
    if args.command == "oracle":
        return ccp_oracle(cfg["problem"], cfg["tail"], delta, budget, seed)
    if args.command == "cvar":
        return cvar_solve(cfg["problem"], cfg["tail"], delta, budget, seed)
    k = int(exp.get("k_grid", [1000])[0])
    batch = sample_tail(cfg["tail"], seed, k)
    return scenario_solve(cfg["problem"], batch, float(exp.get("radius", 1.0)))


def cli_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rarecc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("lt-limit", "ht-limit", "oracle", "cvar", "scenario",
                 "sample-size", "experiment"):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "lt-limit":
            if not isinstance(cfg["tail"], LightTailModel):
                raise ConfigError("lt-limit needs a light tail model")
            sol = solve_lt_limit(RateFunction(cfg["tail"]), cfg["problem"])
            _emit(sol.to_json_dict(), args.out)
        elif args.command == "ht-limit":
            if not isinstance(cfg["tail"], HeavyTailModel):
                raise ConfigError("ht-limit needs a heavy tail model")
            sol = solve_ht_limit(cfg["tail"], cfg["problem"])
            _emit(sol.to_json_dict(), args.out)
        elif args.command in ("oracle", "cvar", "scenario"):
            res = _single_method(cfg, args)
            _emit(res.to_json_dict(), args.out)
        elif args.command == "sample-size":
            exp = cfg["experiment"]
            delta = float(exp.get("delta_grid", [1e-3])[0])
            beta_conf = float(exp.get("beta_conf", 0.01))
            dim = int(exp.get("dim", cfg["problem"].m))
            k = sample_size_rule(delta, beta_conf, dim)
            _emit({"delta": delta, "beta_conf": beta_conf, "dim": dim, "k": k},
                  args.out)
        else:
            ecfg = _experiment_config(cfg, args)
            rows, comments = run_experiment(ecfg)
            out = ecfg.out or "report.csv"
            write_report(rows, out, comments)
            print(f"wrote {len(rows)} rows to {out}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RareccError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def console_main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    console_main()
