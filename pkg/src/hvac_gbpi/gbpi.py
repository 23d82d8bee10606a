"""Gradient-based policy iteration.

The gradient of the expected day cost with respect to a policy weight is

    dJ/dsigma_t(s, a) = pi_t(s) / Sigma(s)^2 * (Sigma(s) Q_t(s, a) - sum_b sigma_t(s, b) Q_t(s, b)),

with Q = r + V the cost of taking ``a`` at stage t and following the policy
afterwards. Stepping each weight by sigma/Sigma times its gradient keeps every
row mass fixed and never increases J.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .mdp import PathBatch, StochasticPolicy
from .oracle import SIZE_LIMIT, EnumeratedMdp, TooLarge


class NoPaths(RuntimeError):
    """Every sampled path was infeasible."""


@dataclass(frozen=True)
class GbpiConfig:
    n_paths: int = 2000
    epsilon: float = 1e-3
    max_iterations: int = 20
    min_visits: int = 10
    cost_scale: float = 1.0  # multiplies the gradient in the update (a change of currency unit)
    seed: int = 0
    eval_scenarios: int = 100

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 0 or self.min_visits < 0 or not self.cost_scale > 0:
            raise ValueError("max_iterations, min_visits must be >= 0 and cost_scale > 0")


@dataclass
class StageGradient:
    states: np.ndarray  # (k,)
    grad: np.ndarray  # (k, A); 0 where not trusted
    trusted: np.ndarray  # (k, A) bool
    occupancy: np.ndarray  # (k,) pi_t(s)
    r_hat: np.ndarray  # (k, A), nan where unvisited
    v_hat: np.ndarray  # (k, A)
    n_state: np.ndarray  # (k,)
    n_pair: np.ndarray  # (k, A)


@dataclass
class GradientEstimate:
    stages: list[StageGradient]
    n_paths: int

    def norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(g.grad[g.trusted] ** 2)) for g in self.stages)))

    def entry(self, t: int, s: int, a: int) -> float:
        g = self.stages[t]
        pos = np.searchsorted(g.states, s)
        if pos >= len(g.states) or g.states[pos] != s or not g.trusted[pos, a]:
            raise KeyError((t, s, a))
        return float(g.grad[pos, a])

    def dense(self, n_states: int) -> np.ndarray:
        out = np.zeros((len(self.stages), n_states, self.stages[0].grad.shape[1]))
        for t, g in enumerate(self.stages):
            out[t, g.states] = np.where(g.trusted, g.grad, 0.0)
        return out


def dp_prob_derivative(row: np.ndarray, a: int) -> np.ndarray:
    """d p(b|s) / d sigma(s, a) for all b, where p(b|s) = sigma(s, b) / Sigma(s)."""
    row = np.asarray(row, dtype=float)
    mass = row.sum()
    out = -row / mass ** 2
    out[a] += 1.0 / mass
    return out


def _row_gradient(rows: np.ndarray, q: np.ndarray, trusted: np.ndarray, occupancy: np.ndarray) -> np.ndarray:
    """Closed-form gradient per row, with the baseline averaged over trusted actions only."""
    mass = rows.sum(axis=1)
    w = np.where(trusted, rows, 0.0)
    wsum = w.sum(axis=1)
    qz = np.where(trusted, q, 0.0)
    base = np.divide((w * qz).sum(axis=1), wsum, out=np.zeros_like(wsum), where=wsum > 0)
    scale = np.divide(occupancy, mass, out=np.zeros_like(mass), where=mass > 0)
    grad = scale[:, None] * (qz - base[:, None])
    return np.where(trusted & (wsum > 0)[:, None], grad, 0.0)


def gradient_from_paths(policy: StochasticPolicy, batch: PathBatch, min_visits: int = 10) -> GradientEstimate:
    """Monte Carlo gradient from feasible paths: visit frequencies, mean stage costs and mean tails."""
    batch = batch.subset(batch.feasible)
    n, T = batch.states.shape
    if n == 0:
        raise NoPaths("no feasible sample paths")
    A = policy.n_actions
    tails = np.cumsum(batch.costs[:, ::-1], axis=1)[:, ::-1]
    tails = np.concatenate([tails[:, 1:], np.zeros((n, 1))], axis=1)
    stages = []
    for t in range(T):
        states, inv = np.unique(batch.states[:, t], return_inverse=True)
        k = len(states)
        a = batch.actions[:, t]
        n_pair = np.zeros((k, A))
        r_sum = np.zeros((k, A))
        v_sum = np.zeros((k, A))
        np.add.at(n_pair, (inv, a), 1.0)
        np.add.at(r_sum, (inv, a), batch.costs[:, t])
        np.add.at(v_sum, (inv, a), tails[:, t])
        with np.errstate(invalid="ignore", divide="ignore"):
            r_hat = np.where(n_pair > 0, r_sum / n_pair, np.nan)
            v_hat = np.where(n_pair > 0, v_sum / n_pair, np.nan)
        n_state = n_pair.sum(axis=1)
        occupancy = n_state / n
        trusted = (n_pair >= max(min_visits, 1))
        grad = _row_gradient(policy.rows(t, states), r_hat + v_hat, trusted, occupancy)
        stages.append(StageGradient(states, grad, trusted, occupancy, r_hat, v_hat, n_state, n_pair))
    return GradientEstimate(stages, n)


def estimate_gradient(policy: StochasticPolicy, env, config: GbpiConfig, rng=None) -> GradientEstimate:
    """Sample ``config.n_paths`` days under ``policy`` and estimate the gradient.

    On the HVAC simulator this also masks comfort-violating pairs in ``policy``.
    """
    rng = np.random.default_rng(config.seed if rng is None else rng)
    batch = env.simulate(policy, config.n_paths, rng, regenerate=True)
    return gradient_from_paths(policy, batch, config.min_visits)


def exact_gradient(policy: StochasticPolicy, mdp: EnumeratedMdp) -> GradientEstimate:
    T, S, A = mdp.n_stages, mdp.n_states, mdp.n_actions
    if T * S * A > SIZE_LIMIT:
        raise TooLarge(f"|S||A|T = {T * S * A} exceeds {SIZE_LIMIT}")
    ev = mdp.evaluate(policy)
    table = policy.dense(S)
    states = np.arange(S)
    trusted = np.ones((S, A), dtype=bool)
    stages = []
    for t in range(T):
        r = mdp.cost[t]
        grad = _row_gradient(table[t], ev.q[t], trusted, ev.occupancy[t])
        stages.append(StageGradient(states, grad, trusted.copy(), ev.occupancy[t], r, ev.q[t] - r,
                                    ev.occupancy[t].copy(), ev.occupancy[t][:, None] * ev.probs[t]))
    return GradientEstimate(stages, 0)


@dataclass(frozen=True)
class UpdateStats:
    rows: int
    clamped_rows: int
    max_mass_drift: float  # over rows without clamping


def apply_gradient(policy: StochasticPolicy, grad: GradientEstimate, scale: float = 1.0):
    """sigma <- sigma - scale * (sigma / Sigma) * grad on every row the estimate covers.

    Entries pushed outside [0, 1] are clipped and the row is rescaled to its old
    mass; such rows are counted as clamped. Returns (new policy, stats).
    """
    new = policy.copy()
    rows = clamped = 0
    drift = 0.0
    for t, g in enumerate(grad.stages):
        if len(g.states) == 0:
            continue
        old = policy.rows(t, g.states)
        mass = old.sum(axis=1)
        step = np.divide(old, mass[:, None], out=np.zeros_like(old), where=mass[:, None] > 0)
        upd = old - scale * step * g.grad
        bad = np.any((upd < 0) | (upd > 1), axis=1)
        if np.any(bad):
            fixed = np.clip(upd[bad], 0.0, 1.0)
            total = fixed.sum(axis=1, keepdims=True)
            upd[bad] = np.where(total > 0, fixed * mass[bad, None] / np.where(total > 0, total, 1.0), old[bad])
        ok = ~bad
        if np.any(ok):
            drift = max(drift, float(np.max(np.abs(upd[ok].sum(axis=1) - mass[ok]))))
        rows += len(g.states)
        clamped += int(bad.sum())
        new.set_rows(t, g.states, upd)
    return new, UpdateStats(rows, clamped, drift)


def update_policy(policy: StochasticPolicy, grad: GradientEstimate, scale: float = 1.0) -> StochasticPolicy:
    return apply_gradient(policy, grad, scale)[0]


def performance_difference(mu: StochasticPolicy, sigma: StochasticPolicy, mdp: EnumeratedMdp) -> float:
    """J(mu) - J(sigma) through mu's state distribution and sigma's values:
    sum_t pi^mu_t [(r^mu - r^sigma) + (P^mu - P^sigma) V^sigma_{t+1}]."""
    T, S, A = mdp.n_stages, mdp.n_states, mdp.n_actions
    if T * S * A > SIZE_LIMIT:
        raise TooLarge(f"|S||A|T = {T * S * A} exceeds {SIZE_LIMIT}")
    ev_s = mdp.evaluate(sigma)
    ev_m = mdp.evaluate(mu)
    total = 0.0
    for t in range(T):
        dp = ev_m.probs[t] - ev_s.probs[t]
        dr = (dp * mdp.cost[t]).sum(axis=1)
        if t < T - 1:
            dr = dr + np.einsum("sa,sax,x->s", dp, mdp.p[t], ev_s.value[t + 1])
        total += float(ev_m.occupancy[t] @ dr)
    return total


# -- the learning loop --------------------------------------------------------

@dataclass
class IterationRecord:
    k: int
    mean_cost: float
    grad_norm: float
    clamp_count: int
    wall_time: float
    feasible_paths: int = 0
    comfort_frequency: float = 1.0
    max_mass_drift: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass
class GbpiResult:
    policy: StochasticPolicy
    trace: list[IterationRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.mean_cost for r in self.trace])


def iteration_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 1, k]))


def run_gbpi(policy: StochasticPolicy, env, config: GbpiConfig, exact: bool = False, log=None,
             scenarios=None) -> GbpiResult:
    """Alternate gradient estimation and the mass-preserving update.

    ``exact`` uses enumerated gradients (``env`` must be an EnumeratedMdp).
    Costs in the trace are exact J for enumerated MDPs, otherwise the mean over
    a fixed held-out scenario set simulated without masking. ``log`` receives one
    JSON line per iteration.
    """
    from .mdp import evaluate_policy

    policy = policy.copy()
    enumerated = isinstance(env, EnumeratedMdp)
    if exact and not enumerated:
        raise TypeError("exact gradients need an enumerated MDP")
    if scenarios is None and hasattr(env, "sample_scenarios"):
        scenarios = env.sample_scenarios(config.eval_scenarios, np.random.default_rng([config.seed, 2]))
    eval_seed = np.random.SeedSequence([config.seed, 3])

    def measure(pol):
        if enumerated:
            return env.expected_cost(pol), 1.0
        s = evaluate_policy(pol, env, config.eval_scenarios, np.random.default_rng(eval_seed), scenarios=scenarios)
        return s.mean, s.comfort_frequency

    result = GbpiResult(policy)
    start = time.perf_counter()
    cost, comfort = measure(policy)
    for k in range(config.max_iterations + 1):
        if exact:
            grad = exact_gradient(policy, env)
        else:
            grad = estimate_gradient(policy, env, config, iteration_rng(config.seed, k))
        norm = grad.norm()
        rec = IterationRecord(k, cost, norm, 0, time.perf_counter() - start, grad.n_paths, comfort)
        if norm <= config.epsilon or k == config.max_iterations:
            result.converged = norm <= config.epsilon
            _emit(result, rec, log)
            break
        policy, stats = apply_gradient(policy, grad, config.cost_scale)
        rec.clamp_count = stats.clamped_rows
        rec.max_mass_drift = stats.max_mass_drift
        _emit(result, rec, log)
        cost, comfort = measure(policy)
    result.policy = policy
    return result


def _emit(result: GbpiResult, rec: IterationRecord, log):
    result.trace.append(rec)
    if log is not None:
        log.write(rec.to_json() + "\n")
        log.flush()
