"""Experiment pipelines shared by the command line and the scripts."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, build_env
from .gbpi import GbpiConfig, GbpiResult, run_gbpi
from .mdp import EvaluationSummary, HvacMdp, Scenarios, StochasticPolicy, evaluate_policy
from .oracle import PlanResult, solve_perfect_information

# fixed offsets into the seed sequence so each use of the master seed gets its own stream
EVAL_STREAM = 7
ACTION_STREAM = 11


def gbpi_config(cfg: ExperimentConfig, **overrides) -> GbpiConfig:
    lc = cfg.learn
    base = GbpiConfig(n_paths=lc.n_paths, epsilon=lc.epsilon, max_iterations=lc.max_iterations,
                      min_visits=lc.min_visits, cost_scale=lc.cost_scale, seed=cfg.seed,
                      eval_scenarios=lc.eval_scenarios)
    return dataclasses.replace(base, **overrides)


def learn(cfg: ExperimentConfig, env: HvacMdp | None = None, log=None, **overrides) -> tuple[HvacMdp, GbpiResult]:
    env = env if env is not None else build_env(cfg)
    result = run_gbpi(env.initial_policy(), env, gbpi_config(cfg, **overrides), log=log)
    return env, result


def evaluation_scenarios(env: HvacMdp, n: int, seed: int) -> Scenarios:
    """Held-out days, identical for every command run with the same seed."""
    return env.sample_scenarios(n, np.random.default_rng(np.random.SeedSequence([seed, EVAL_STREAM])))


def evaluate(env: HvacMdp, policy: StochasticPolicy, scenarios: Scenarios, seed: int) -> EvaluationSummary:
    rng = np.random.default_rng(np.random.SeedSequence([seed, ACTION_STREAM]))
    return evaluate_policy(policy, env, len(scenarios), rng, scenarios=scenarios)


@dataclass(frozen=True)
class OracleSummary:
    plans: list[PlanResult]

    @property
    def costs(self) -> np.ndarray:
        return np.array([p.cost for p in self.plans])

    @property
    def comfortable(self) -> np.ndarray:
        return np.array([p.comfortable for p in self.plans])

    @property
    def mean(self) -> float:
        return float(self.costs.mean())


def oracle_costs(env: HvacMdp, scenarios: Scenarios, resolution=(0.1, 0.01, 0.2)) -> OracleSummary:
    """Perfect-information plan per scenario; scenarios with no comfortable plan fall back to
    the penalised optimum and are flagged."""
    return OracleSummary([solve_perfect_information(env, scenarios.day(i), resolution, strict=False)
                          for i in range(len(scenarios))])


def relative_gap(policy_cost: float, oracle_cost: float) -> float:
    """Percentage by which the policy's mean cost exceeds the oracle's."""
    return 100.0 * (policy_cost - oracle_cost) / oracle_cost
