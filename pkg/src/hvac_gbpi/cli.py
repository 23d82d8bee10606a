"""Command-line entry point: ``hvac-gbpi <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .comfort import NonConvergence
from .experiments import evaluate, evaluation_scenarios, learn, oracle_costs, relative_gap
from .gbpi import NoPaths
from .markov import (DataError, WeatherProfile, discretize_weather, estimate_chains, read_weather_csv, save_chains,
                     synth_weather, write_weather_csv)
from .mdp import DeadState, Infeasible
from .oracle import TooLarge, quantized_mdp, solve_dp
from .persistence import Corrupt, VersionMismatch, load_policy, policy_header, save_policy
from .thermal import SimulationError

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INFEASIBLE = 4


def _config(args) -> cfgmod.ExperimentConfig:
    if args.config:
        cfg = cfgmod.load_config(args.config, case=args.case, seed=args.seed)
    else:
        cfg = cfgmod.preset(args.case or 2, args.seed or 0)
    learn_updates = {}
    if getattr(args, "paths", None):
        learn_updates["n_paths"] = args.paths
    if getattr(args, "scenarios", None):
        learn_updates["eval_scenarios"] = args.scenarios
    if getattr(args, "iterations", None) is not None:
        learn_updates["max_iterations"] = args.iterations
    if learn_updates:
        cfg = dataclasses.replace(cfg, learn=dataclasses.replace(cfg.learn, **learn_updates))
    cfgmod.validate(cfg)
    return cfg


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_synth_weather(args):
    cfg = _config(args)
    weather = synth_weather(WeatherProfile(solar_peak=cfg.weather.solar_peak), args.days or cfg.weather.synth_days,
                            cfg.seed)
    path = _out(args) / "weather.csv"
    write_weather_csv(weather, path)
    print(f"wrote {len(weather)} days to {path}")


def cmd_estimate_chains(args):
    cfg = _config(args)
    weather = read_weather_csv(args.weather) if args.weather else cfgmod.load_weather(cfg)
    grids = cfgmod.grids(cfg)
    chains = estimate_chains(weather, grids["t_out"], grids["rh_out"], occ_levels=cfg.grid.occ_levels)
    _, _, solar = discretize_weather(weather, grids["t_out"], grids["rh_out"])
    path = _out(args) / "chains.json"
    save_chains(chains, path, {k: grids[k] for k in ("t_out", "rh_out")}, solar)
    print(f"wrote chains over {len(weather)} days to {path}")


def cmd_learn(args):
    cfg = _config(args)
    out = _out(args)
    with open(out / "iterations.jsonl", "w") as log:
        env, result = learn(cfg, log=log)
    save_policy(result.policy, out / "policy.txt", policy_header(env))
    (out / "config.ini").write_text(cfgmod.dump_config(cfg))
    last = result.trace[-1]
    print(f"{len(result.trace)} iterations, final mean cost {last.mean_cost:.4f}, "
          f"comfort {last.comfort_frequency:.3f}; policy in {out / 'policy.txt'}")


def _load_policy(args, env):
    path = Path(args.policy) if args.policy else Path(args.out) / "policy.txt"
    return load_policy(path, policy_header(env))


def _write_histogram(path: Path, costs, bins: int = 20):
    counts, edges = np.histogram(costs, bins=bins)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c)])


def cmd_evaluate(args):
    cfg = _config(args)
    env = cfgmod.build_env(cfg)
    policy = _load_policy(args, env)
    scenarios = evaluation_scenarios(env, cfg.learn.eval_scenarios, cfg.seed)
    summary = evaluate(env, policy, scenarios, cfg.seed)
    out = _out(args)
    _write_json(out / "evaluation.json", summary.as_dict())
    _write_histogram(out / "histogram.csv", summary.costs)
    d = summary.as_dict()
    print(f"mean cost {d['mean_cost']:.4f} over {d['n']} scenarios; comfort frequency {d['comfort_frequency']:.3f}")
    for k, v in d["quantiles"].items():
        print(f"  {k}: {v:.4f}")


def cmd_oracle(args):
    cfg = _config(args)
    env = cfgmod.build_env(cfg)
    out = _out(args)
    if args.mode == "dp":
        mdp = quantized_mdp(env)
        _, value = solve_dp(mdp)
        doc = {"dp_value": float(mdp.initial @ value[0])}
        _write_json(out / "oracle_dp.json", doc)
        print(f"DP optimal expected cost {doc['dp_value']:.6f}")
        return
    scenarios = evaluation_scenarios(env, cfg.learn.eval_scenarios, cfg.seed)
    res = oracle_costs(env, scenarios)
    with open(out / "oracle.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "cost", "comfortable"])
        for i, p in enumerate(res.plans):
            w.writerow([i, repr(p.cost), int(p.comfortable)])
    print(f"perfect-information mean cost {res.mean:.4f} over {len(scenarios)} scenarios "
          f"({int(res.comfortable.sum())} fully comfortable)")


def cmd_report(args):
    cfg = _config(args)
    env = cfgmod.build_env(cfg)
    policy = _load_policy(args, env)
    scenarios = evaluation_scenarios(env, cfg.learn.eval_scenarios, cfg.seed)
    summary = evaluate(env, policy, scenarios, cfg.seed)
    res = oracle_costs(env, scenarios)
    gap = relative_gap(summary.mean, res.mean)
    out = _out(args)
    with open(out / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "scenarios", "gbpi_mean_cost", "oracle_mean_cost", "gap_pct", "comfort_frequency",
                    "oracle_comfortable_days"])
        w.writerow([cfg.case, len(scenarios), repr(summary.mean), repr(res.mean), repr(gap),
                    repr(summary.comfort_frequency), int(res.comfortable.sum())])
    with open(out / "report_scenarios.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "gbpi_cost", "oracle_cost", "gbpi_comfort"])
        inside = (summary.pmv >= env.band.pmv_low) & (summary.pmv <= env.band.pmv_high)
        for i in range(len(scenarios)):
            w.writerow([i, repr(float(summary.costs[i])), repr(float(res.costs[i])), repr(float(inside[i].mean()))])
    print(f"case {cfg.case}: GBPI {summary.mean:.4f} vs oracle {res.mean:.4f} -> gap {gap:.1f}%, "
          f"comfort frequency {summary.comfort_frequency:.3f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hvac-gbpi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI file overriding the case preset")
        p.add_argument("--case", type=int, choices=(1, 2, 3), help="preset (default 2)")
        p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--out", default="runs", help="output directory")
        return p

    p = common(sub.add_parser("synth-weather", help="write a synthetic weather CSV"))
    p.add_argument("--days", type=int)
    p.set_defaults(func=cmd_synth_weather)

    p = common(sub.add_parser("estimate-chains", help="estimate Markov chains from a weather CSV"))
    p.add_argument("--weather", help="CSV with timestamp,temp_c,rh_pct[,solar_wm2]")
    p.set_defaults(func=cmd_estimate_chains)

    p = common(sub.add_parser("learn", help="run GBPI and save the policy and iteration log"))
    p.add_argument("--paths", type=int, help="sample paths per iteration")
    p.add_argument("--iterations", type=int, help="maximum iterations")
    p.add_argument("--scenarios", type=int, help="held-out scenarios for the cost trace")
    p.set_defaults(func=cmd_learn)

    p = common(sub.add_parser("evaluate", help="cost and comfort statistics of a saved policy"))
    p.add_argument("--policy")
    p.add_argument("--scenarios", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = common(sub.add_parser("oracle", help="perfect-information or DP reference costs"))
    p.add_argument("--mode", choices=("pi", "dp"), default="pi")
    p.add_argument("--scenarios", type=int)
    p.set_defaults(func=cmd_oracle)

    p = common(sub.add_parser("report", help="gap of a saved policy to the perfect-information oracle"))
    p.add_argument("--policy")
    p.add_argument("--scenarios", type=int)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (cfgmod.ConfigError, TooLarge) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, Corrupt, VersionMismatch, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (Infeasible, NoPaths, DeadState, SimulationError, NonConvergence) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return 0


if __name__ == "__main__":
    sys.exit(main())
