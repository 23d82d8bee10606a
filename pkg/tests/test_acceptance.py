"""Acceptance criteria. Each test prints one PASS/FAIL line (collected again in the terminal summary).

The Case-II learning run and the perfect-information oracle are shared across
criteria through module fixtures; together they take a few minutes.
"""

import time

import numpy as np
import pytest

from hvac_gbpi.comfort import pmv
from hvac_gbpi.config import build_env, preset, tiny_config
from hvac_gbpi.experiments import evaluate, evaluation_scenarios, learn, oracle_costs, relative_gap
from hvac_gbpi.gbpi import GbpiConfig, dp_prob_derivative, exact_gradient, gradient_from_paths, performance_difference
from hvac_gbpi.gbpi import run_gbpi
from hvac_gbpi.markov import transition_matrices
from hvac_gbpi.mdp import StochasticPolicy
from hvac_gbpi.oracle import EnumeratedMdp, quantized_mdp, solve_dp
from hvac_gbpi.thermal import ContinuousState, ControlInput, ExogenousSample, HvacParams, RoomParams, hvac_power
from reference import fanger_pmv

# exact-gradient runs on the tiny MDP: step multiplier and iteration budget (see README)
EXACT_SCALE = 3e3
EXACT_ITERATIONS = 600
MC_SCALE = 300.0
MC_ITERATIONS = 40


@pytest.fixture(scope="module")
def tiny():
    env = build_env(tiny_config(0))
    mdp = quantized_mdp(env)
    _, v = solve_dp(mdp)
    return env, mdp, float(mdp.initial @ v[0])


@pytest.fixture(scope="module")
def exact_run(tiny):
    _, mdp, _ = tiny
    start = time.perf_counter()
    res = run_gbpi(mdp.uniform_policy(), mdp, GbpiConfig(epsilon=1e-12, max_iterations=EXACT_ITERATIONS,
                                                         cost_scale=EXACT_SCALE), exact=True)
    return res, time.perf_counter() - start


@pytest.fixture(scope="module")
def mc_run(tiny):
    _, mdp, _ = tiny
    start = time.perf_counter()
    res = run_gbpi(mdp.uniform_policy(), mdp, GbpiConfig(n_paths=10_000, epsilon=1e-12, max_iterations=MC_ITERATIONS,
                                                         cost_scale=MC_SCALE, seed=0))
    return res, time.perf_counter() - start


@pytest.fixture(scope="module")
def case2():
    cfg = preset(2, 0)
    start = time.perf_counter()
    env, result = learn(cfg)
    elapsed = time.perf_counter() - start
    scenarios = evaluation_scenarios(env, 100, cfg.seed)
    return cfg, env, result, elapsed, scenarios, evaluate(env, result.policy, scenarios, cfg.seed)


def test_row_mass_preserved(exact_run, mc_run, criterion):
    drift = max(r.max_mass_drift for res, _ in (exact_run, mc_run) for r in res.trace)
    clamped = sum(r.clamp_count for res, _ in (exact_run, mc_run) for r in res.trace)
    criterion("row-mass preservation", drift <= 1e-9,
              f"max |dSigma| over unclamped rows {drift:.2e} (<= 1e-9); {clamped} clamped row updates excluded")


def test_monotone_descent(exact_run, criterion):
    res, elapsed = exact_run
    rise = float(np.max(np.diff(res.costs)))
    criterion("monotone descent (exact gradients)", rise <= 1e-12 and elapsed < 10.0,
              f"largest increase {rise:.2e} (<= 1e-12) over {len(res.trace)} iterations in {elapsed:.1f} s (< 10 s)")


def test_optimality(tiny, exact_run, mc_run, criterion):
    _, mdp, v_star = tiny
    exact_gap = abs(exact_run[0].costs[-1] - v_star)
    mc_cost = mdp.expected_cost(mc_run[0].policy)
    mc_rel = (mc_cost - v_star) / v_star
    ok = exact_gap <= 1e-6 and mc_rel <= 0.02 and mc_run[1] < 60.0
    criterion("optimality vs DP", ok,
              f"DP {v_star:.6f}; exact GBPI off by {exact_gap:.1e} (<= 1e-6); MC GBPI {mc_cost:.4f}, "
              f"{100 * mc_rel:.2f}% (<= 2%) in {mc_run[1]:.1f} s (< 60 s)")


def _two_stage_mdp():
    p = np.array([[[[0.7, 0.3], [0.2, 0.8]], [[0.5, 0.5], [0.9, 0.1]]]])
    cost = np.array([[[1.0, 2.5], [3.0, 1.2]], [[0.4, 2.0], [1.5, 0.2]]])
    return EnumeratedMdp(p, cost, np.array([0.6, 0.4]))


def test_gradient_correctness(tiny, criterion):
    _, mdp, _ = tiny
    rng = np.random.default_rng(0)
    table = rng.uniform(0.05, 1.0, (mdp.n_stages, mdp.n_states, mdp.n_actions))
    table /= table.sum(axis=2, keepdims=True)
    grad = exact_gradient(StochasticPolicy.from_dense(table), mdp).dense(mdp.n_states)
    h = 1e-6
    entries = [tuple(rng.integers(0, n) for n in table.shape) for _ in range(400)]
    entries += [(0, s, a) for s in np.flatnonzero(mdp.initial) for a in range(mdp.n_actions)]
    fd_err = 0.0
    for e in entries:
        up, down = table.copy(), table.copy()
        up[e] += h
        down[e] -= h
        fd = (mdp.expected_cost(StochasticPolicy.from_dense(up))
              - mdp.expected_cost(StochasticPolicy.from_dense(down))) / (2 * h)
        fd_err = max(fd_err, abs(fd - grad[e]))

    small = _two_stage_mdp()
    pol = StochasticPolicy.from_dense(np.array([[[0.3, 0.7], [0.6, 0.4]], [[0.5, 0.5], [0.8, 0.2]]]))
    exact = exact_gradient(pol, small).dense(2)
    est = gradient_from_paths(pol, small.simulate(pol, 10_000, np.random.default_rng(1)), min_visits=100)
    rel = [abs(g.grad[i, a] - exact[t, s, a]) / abs(exact[t, s, a])
           for t, g in enumerate(est.stages) for i, s in enumerate(g.states) for a in range(2) if g.trusted[i, a]]
    ok = fd_err <= 1e-6 and max(rel) <= 0.05
    criterion("gradient correctness", ok,
              f"exact vs central differences on {len(entries)} tiny-MDP entries: max abs error {fd_err:.1e} (<= 1e-6); "
              f"MC (1e4 paths) vs exact on {len(rel)} entries with >= 100 visits: max rel error "
              f"{100 * max(rel):.2f}% (<= 5%)")


def test_prob_derivative_identity(criterion):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        row = rng.random(int(rng.integers(2, 30))) * rng.uniform(0.1, 1.0)
        worst = max(worst, abs(dp_prob_derivative(row, int(rng.integers(len(row)))).sum()))
    criterion("dp/dsigma rows sum to zero", worst <= 1e-12, f"max |sum_b dp(b)/dsigma(a)| {worst:.1e} over 1000 rows")


def test_performance_difference(tiny, criterion):
    _, mdp, _ = tiny
    rng = np.random.default_rng(0)
    shape = (mdp.n_stages, mdp.n_states, mdp.n_actions)
    worst = 0.0
    for _ in range(50):
        mu, sigma = (StochasticPolicy.from_dense(rng.dirichlet(np.ones(shape[2]), shape[:2])) for _ in range(2))
        direct = mdp.expected_cost(mu) - mdp.expected_cost(sigma)
        worst = max(worst, abs(performance_difference(mu, sigma, mdp) - direct))
    criterion("performance-difference identity", worst <= 1e-10,
              f"max |formula - direct| {worst:.1e} over 50 policy pairs (<= 1e-10)")


def test_pmv_against_oracle(criterion):
    conditions = [(t, rh) for t in np.linspace(20, 30, 7) for rh in (0.3, 0.5, 0.7)]
    err = max(abs(pmv(t, rh, t + 2.0) - fanger_pmv(t, t + 2.0, 0.2, rh, 1.0, 1.0)) for t, rh in conditions)
    grid = np.arange(18.0, 32.01, 0.5)
    monotone = bool(np.all(np.diff(pmv(grid, 0.5, grid + 2.0)) > 0))
    criterion("PMV vs independent oracle", err <= 0.01 and monotone,
              f"max abs difference {err:.4f} on {len(conditions)} conditions (<= 0.01); "
              f"monotone on 0.5 C grid: {monotone}")


def test_comfort_guarantee(case2, criterion):
    _, env, result, _, _, summary = case2
    policy = result.policy.copy()
    batch = env.simulate(policy, 2000, np.random.default_rng(17), regenerate=True)
    emitted = batch.subset(batch.feasible)
    violations = int((~emitted.comfort).sum())
    ok = summary.comfort_frequency >= 0.85 and violations == 0
    criterion("comfort guarantee (Case II)", ok,
              f"comfort frequency {summary.comfort_frequency:.3f} over 100 scenarios (>= 0.85); "
              f"{violations} in-band violations in {len(emitted)} emitted paths "
              f"({len(batch) - len(emitted)} dead-state paths withheld)")


def test_convergence_speed(case2, criterion):
    _, _, result, elapsed, _, _ = case2
    costs = result.costs
    final = costs[-1]
    within = np.abs(costs - final) <= 0.05 * abs(final)
    first = int(np.argmax(within & np.flip(np.logical_and.accumulate(np.flip(within)))))
    ok = first <= 15 and elapsed < 15 * 60
    criterion("convergence speed (Case II)", ok,
              f"within 5% of final cost {final:.3f} from iteration {first} on (<= 15); "
              f"learn run {elapsed:.0f} s (< 900 s)")


def test_gap_to_perfect_information(case2, criterion):
    _, env, _, _, scenarios, summary = case2
    oracle = oracle_costs(env, scenarios)
    gap = relative_gap(summary.mean, oracle.mean)
    criterion("gap to perfect-information oracle (Case II)", gap <= 20.0,
              f"GBPI {summary.mean:.4f} vs oracle {oracle.mean:.4f} on 100 matched scenarios: gap {gap:.1f}% "
              f"(<= 20%; published range 6.5-12.9%); oracle comfortable on {int(oracle.comfortable.sum())}/100")


def test_fan_law_and_row_stochastic_chains(criterion):
    room, hvac = RoomParams(), HvacParams()
    s = ContinuousState(25.0, 0.5, 25.0, 25.0)
    exo = ExogenousSample(30.0, 0.7, 0.0)
    fan_err = 0.0
    for frac in (0.0, 0.5, 1.0):
        p = hvac_power(s, exo, ControlInput(frac * hvac.fau_rated_flow, 15.0, frac * hvac.fcu_rated_flow, 15.0),
                       room, hvac)
        fan_err = max(fan_err, abs(p.fan_fcu - frac ** 3 * hvac.fcu_rated_fan_power),
                      abs(p.fan_fau - frac ** 3 * hvac.fau_rated_fan_power))
    rng = np.random.default_rng(0)
    worst = 0.0
    in_box = True
    for _ in range(1000):
        L = int(rng.integers(1, 8))
        levels = rng.integers(0, L, (int(rng.integers(1, 30)), int(rng.integers(2, 49))))
        p = transition_matrices(levels, L)
        worst = max(worst, float(np.max(np.abs(p.sum(axis=2) - 1.0))))
        in_box &= bool(np.all((p >= 0) & (p <= 1)))
    ok = fan_err == 0.0 and worst <= 1e-9 and in_box
    criterion("fan cubic law and row-stochastic chains", ok,
              f"fan error at 0, 1/2, 1 x rated {fan_err:.1e}; max row-sum error {worst:.1e} over 1000 random datasets")
