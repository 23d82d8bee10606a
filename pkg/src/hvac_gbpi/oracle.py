"""Reference solvers: enumerated finite MDPs with exact DP, and a perfect-information planner."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mdp import (DeadState, HvacMdp, Infeasible, PathBatch, Scenarios, StochasticPolicy, _mask_pairs,
                  draw_actions)
from .thermal import ContinuousState

SIZE_LIMIT = 10 ** 6


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Evaluation:
    """Exact quantities of a policy on an enumerated MDP."""

    cost: float  # J = initial . V[0]
    value: np.ndarray  # (T+1, S), value[T] = 0
    occupancy: np.ndarray  # (T, S) state distribution pi_t
    q: np.ndarray  # (T, S, A) r + P V[t+1]
    probs: np.ndarray  # (T, S, A) normalised policy


@dataclass
class EnumeratedMdp:
    """Finite-horizon MDP with dense tensors: p[t, s, a, s'] for t < T-1, cost[t, s, a] for t < T."""

    p: np.ndarray
    cost: np.ndarray
    initial: np.ndarray
    violation: np.ndarray | None = None  # (T, S, A) bool, informational
    penalty: float = 0.0

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.cost = np.asarray(self.cost, dtype=float)
        self.initial = np.asarray(self.initial, dtype=float)
        T, S, A = self.cost.shape
        if T * S * A > SIZE_LIMIT:
            raise TooLarge(f"|S||A|T = {T * S * A} exceeds {SIZE_LIMIT}")
        if self.p.shape != (T - 1, S, A, S):
            raise ValueError(f"transition tensor must be {(T - 1, S, A, S)}, got {self.p.shape}")
        if np.any(self.p < 0) or not np.allclose(self.p.sum(axis=3), 1.0, atol=1e-9, rtol=0):
            raise ValueError("transition rows must sum to 1")
        if self.initial.shape != (S,) or not np.isclose(self.initial.sum(), 1.0, atol=1e-9):
            raise ValueError("initial distribution must be a probability vector over states")
        if self.violation is None:
            self.violation = np.zeros(self.cost.shape, dtype=bool)

    @property
    def n_stages(self) -> int:
        return self.cost.shape[0]

    @property
    def n_states(self) -> int:
        return self.cost.shape[1]

    @property
    def n_actions(self) -> int:
        return self.cost.shape[2]

    def uniform_policy(self) -> StochasticPolicy:
        return StochasticPolicy.uniform(self.n_stages, self.n_actions, self.n_states)

    def policy_probs(self, policy: StochasticPolicy) -> np.ndarray:
        table = policy.dense(self.n_states)
        mass = table.sum(axis=2, keepdims=True)
        return np.divide(table, mass, out=np.zeros_like(table), where=mass > 0)

    def evaluate(self, policy: StochasticPolicy) -> Evaluation:
        """Backward pass for V and Q, forward pass for the state distribution."""
        probs = self.policy_probs(policy)
        T, S, A = self.cost.shape
        value = np.zeros((T + 1, S))
        q = np.empty((T, S, A))
        for t in range(T - 1, -1, -1):
            q[t] = self.cost[t] + (self.p[t] @ value[t + 1] if t < T - 1 else 0.0)
            value[t] = (probs[t] * q[t]).sum(axis=1)
        occ = np.empty((T, S))
        occ[0] = self.initial
        for t in range(T - 1):
            occ[t + 1] = np.einsum("s,sa,sax->x", occ[t], probs[t], self.p[t])
        if np.any((occ > 0) & (probs.sum(axis=2) == 0)):
            raise DeadState("a reachable state has an all-zero policy row")
        return Evaluation(float(self.initial @ value[0]), value, occ, q, probs)

    def expected_cost(self, policy: StochasticPolicy) -> float:
        return self.evaluate(policy).cost

    def simulate(self, policy: StochasticPolicy, n: int, rng, regenerate: bool = False,
                 scenarios=None) -> PathBatch:
        """Sample ``n`` paths. Costs already carry the penalty.

        With ``regenerate``, a drawn pair flagged in ``violation`` is masked in
        ``policy`` and redrawn, as on the simulator; a row with nothing left keeps
        its cheapest action and pays the penalty.
        """
        rng = np.random.default_rng(rng)
        T = self.n_stages
        states = np.zeros((n, T), dtype=np.int64)
        actions = np.zeros((n, T), dtype=np.int64)
        s = draw_actions(np.broadcast_to(self.initial, (n, self.n_states)), rng)
        for t in range(T):
            if regenerate:
                a = self._draw_masked(policy, t, s, rng)
            else:
                a = draw_actions(policy.rows(t, s), rng)
                if np.any(a < 0):
                    raise DeadState(f"stage {t}: all-zero policy row")
            states[:, t], actions[:, t] = s, a
            if t < T - 1:
                s = draw_actions(self.p[t, s, a], rng)
        t_idx = np.arange(T)[None, :]
        costs = self.cost[t_idx, states, actions]
        comfort = ~self.violation[t_idx, states, actions]
        return PathBatch(states, actions, costs, np.zeros(costs.shape), comfort, np.ones(n, dtype=bool))

    def _draw_masked(self, policy, t, s, rng):
        chosen = np.full(len(s), -1, dtype=np.int64)
        pending = np.arange(len(s))
        while len(pending):
            a = draw_actions(policy.rows(t, s[pending]), rng)
            dead = a < 0
            bad = ~dead & self.violation[t, s[pending], np.maximum(a, 0)]
            good = ~dead & ~bad
            chosen[pending[good]] = a[good]
            if np.any(bad):
                pairs = np.unique(np.stack([s[pending[bad]], a[bad]]), axis=1)
                _mask_pairs(policy, t, pairs[0], pairs[1])
            for i in pending[dead]:
                best = int(np.argmin(self.cost[t, s[i]]))
                row = np.zeros(self.n_actions)
                row[best] = 1.0
                policy.set_rows(t, [s[i]], row[None, :])
                chosen[i] = best
            pending = pending[chosen[pending] < 0]
        return chosen


def solve_dp(mdp: EnumeratedMdp):
    """Backward induction; returns (actions[t, s], V*[t, s]) with V* of shape (T+1, S).

    Ties go to the lowest action index.
    """
    T, S, A = mdp.cost.shape
    value = np.zeros((T + 1, S))
    policy = np.zeros((T, S), dtype=np.int64)
    for t in range(T - 1, -1, -1):
        q = mdp.cost[t] + (mdp.p[t] @ value[t + 1] if t < T - 1 else 0.0)
        policy[t] = np.argmin(q, axis=1)
        value[t] = q[np.arange(S), policy[t]]
    return policy, value


def deterministic_policy(actions: np.ndarray, n_actions: int) -> StochasticPolicy:
    T, S = actions.shape
    table = np.zeros((T, S, n_actions))
    table[np.arange(T)[:, None], np.arange(S)[None, :], actions] = 1.0
    return StochasticPolicy.from_dense(table)


def random_mdp(rng, n_stages: int, n_states: int, n_actions: int, cost_scale: float = 1.0) -> EnumeratedMdp:
    """Random dense instance for tests and sanity checks."""
    rng = np.random.default_rng(rng)
    p = rng.random((n_stages - 1, n_states, n_actions, n_states)) + 0.05
    p /= p.sum(axis=3, keepdims=True)
    init = rng.random(n_states) + 0.1
    return EnumeratedMdp(p, cost_scale * rng.random((n_stages, n_states, n_actions)), init / init.sum())


# -- quantised HVAC MDP -------------------------------------------------------

def quantized_mdp(env: HvacMdp, penalty: float | None = None) -> EnumeratedMdp:
    """Enumerate the discretised HVAC problem.

    Each state is represented by its level midpoints (walls at the indoor
    midpoint); indoor levels move deterministically to the level of the
    simulated next state, exogenous levels follow the chains. Stage cost is
    energy plus ``penalty`` when the PMV after the step leaves the band.
    """
    sp = env.states
    T, S, A = env.n_stages, sp.size, env.n_actions
    if T * S * A > SIZE_LIMIT:
        raise TooLarge(f"|S||A|T = {T * S * A} exceeds {SIZE_LIMIT}")
    penalty = env.penalty if penalty is None else penalty
    to, ho, ti, hi, oc = sp.decode(np.arange(S))
    t_in = sp.t_in.value(ti)
    here = ContinuousState(t_in, sp.rh_in.value(hi), t_in, t_in)
    cost = np.empty((T, S, A))
    violation = np.empty((T, S, A), dtype=bool)
    p = np.zeros((T - 1, S, A, S))
    L = sp.shape
    for t in range(T):
        nxt, value, energy = env.outcomes(t, here, env.exogenous(t, to, ho, oc))
        bad = (value < env.band.pmv_low) | (value > env.band.pmv_high)
        violation[t] = bad
        cost[t] = energy + penalty * bad
        if t == T - 1:
            break
        nti = sp.t_in.level(nxt.t_indoor)
        nhi = sp.rh_in.level(nxt.rh_indoor)
        pt, ph, po = env.chains.temp[t], env.chains.humid[t], env.chains.occ[t]
        exo = np.einsum("sa,sb,sc->sabc", pt[to], ph[ho], po[oc])  # (S, LT, LH, LA)
        full = np.zeros((S, A) + L)
        s_idx = np.arange(S)[:, None]
        a_idx = np.arange(A)[None, :]
        full[s_idx, a_idx, :, :, nti, nhi, :] = exo[:, None, :, :, :]
        p[t] = full.reshape(S, A, S)
    init = np.zeros(S)
    s0 = env.initial_state
    init[sp.quantize(0, env.initial_levels[0], env.initial_levels[1], s0.t_indoor, s0.rh_indoor,
                     env.initial_levels[2])] = 1.0
    return EnumeratedMdp(p, cost, init, violation, penalty)


# -- perfect information ------------------------------------------------------

@dataclass(frozen=True)
class PlanResult:
    actions: np.ndarray  # (T,)
    cost: float  # energy only
    comfortable: bool
    pmv: np.ndarray
    t_indoor: np.ndarray  # (T+1,)


def _replay(env: HvacMdp, scenario: Scenarios, actions) -> PlanResult:
    cur = env.initial_state
    cur = ContinuousState(*(np.array([float(getattr(cur, f))]) for f in
                            ("t_indoor", "rh_indoor", "t_wall_left", "t_wall_right")))
    total, pmvs, temps, ok = 0.0, [], [float(cur.t_indoor[0])], True
    for t, a in enumerate(actions):
        lv = (scenario.temp[0, t], scenario.humid[0, t], scenario.occ[0, t])
        nxt, value, cost = env.outcomes(t, cur, env.exogenous(t, *[np.array([x]) for x in lv]))
        total += float(cost[0, a])
        pmvs.append(float(value[0, a]))
        ok &= env.band.pmv_low <= value[0, a] <= env.band.pmv_high
        cur = ContinuousState(nxt.t_indoor[:, a], nxt.rh_indoor[:, a], nxt.t_wall_left[:, 0],
                              nxt.t_wall_right[:, 0])
        temps.append(float(cur.t_indoor[0]))
    return PlanResult(np.asarray(actions), total, bool(ok), np.array(pmvs), np.array(temps))


def solve_perfect_information(env: HvacMdp, scenario: Scenarios, resolution=(0.05, 0.005, 0.1),
                              strict: bool = True) -> PlanResult:
    """Cheapest comfortable action sequence for one fully revealed day.

    Forward DP over the continuous room state: at every stage each surviving
    state is expanded by every action, and among candidates falling into the
    same bucket (indoor temp, indoor rh, wall temps at ``resolution``) only the
    cheapest is kept. ``resolution=None`` keeps every candidate (exhaustive).
    With ``strict`` an empty frontier raises Infeasible; otherwise violations are
    allowed at the environment penalty and the plan is marked uncomfortable.
    """
    T, A = env.n_stages, env.n_actions
    s0 = env.initial_state
    cur = ContinuousState(*(np.array([float(getattr(s0, f))]) for f in
                            ("t_indoor", "rh_indoor", "t_wall_left", "t_wall_right")))
    cost = np.zeros(1)
    back = []  # per stage: (parent index, action) of each survivor
    for t in range(T):
        k = len(cost)
        lv = [np.full(k, x[0, t]) for x in (scenario.temp, scenario.humid, scenario.occ)]
        nxt, value, energy = env.outcomes(t, cur, env.exogenous(t, *lv))
        ok = (value >= env.band.pmv_low) & (value <= env.band.pmv_high)
        total = cost[:, None] + energy
        allowed = ok
        if not strict:
            # a violation is only considered where a state has no comfortable action at all
            total = total + env.penalty * ~ok
            allowed = ok | ~ok.any(axis=1, keepdims=True)
        elif not ok.any():
            raise Infeasible(t, None, "no comfortable action sequence for this scenario")
        parent, action = np.nonzero(allowed)
        cand_cost = total[parent, action]
        ta = nxt.t_indoor[parent, action]
        rh = nxt.rh_indoor[parent, action]
        twl = nxt.t_wall_left[parent, 0]
        twr = nxt.t_wall_right[parent, 0]
        # cheapest first, then lowest action index, then earliest parent
        order = np.lexsort((parent, action, cand_cost))
        if resolution is not None:
            keys = np.stack([np.floor(x / r) for x, r in
                             zip((ta, rh, twl, twr), (resolution[0], resolution[1], resolution[2],
                                                      resolution[2]))], axis=1)[order]
            _, first = np.unique(keys, axis=0, return_index=True)
            order = order[np.sort(first)]
        back.append((parent[order], action[order]))
        cost = cand_cost[order]
        cur = ContinuousState(ta[order], rh[order], twl[order], twr[order])
    best = int(np.argmin(cost))
    actions = np.empty(T, dtype=np.int64)
    for t in range(T - 1, -1, -1):
        parents, acts = back[t]
        actions[t] = acts[best]
        best = int(parents[best])
    return _replay(env, scenario, actions)


def brute_force_plan(env: HvacMdp, scenario: Scenarios) -> PlanResult:
    """Exhaustive search over all action sequences; only for a handful of stages."""
    T, A = env.n_stages, env.n_actions
    if A ** T > 2 * 10 ** 5:
        raise TooLarge("too many action sequences to enumerate")
    seqs = np.array(list(itertools.product(range(A), repeat=T)), dtype=np.int64)
    n = len(seqs)
    s0 = env.initial_state
    cur = ContinuousState(*(np.full(n, float(getattr(s0, f))) for f in
                            ("t_indoor", "rh_indoor", "t_wall_left", "t_wall_right")))
    total = np.zeros(n)
    ok = np.ones(n, dtype=bool)
    rows = np.arange(n)
    for t in range(T):
        lv = [np.full(n, x[0, t]) for x in (scenario.temp, scenario.humid, scenario.occ)]
        nxt, value, energy = env.outcomes(t, cur, env.exogenous(t, *lv))
        a = seqs[:, t]
        total += energy[rows, a]
        ok &= (value[rows, a] >= env.band.pmv_low) & (value[rows, a] <= env.band.pmv_high)
        cur = ContinuousState(nxt.t_indoor[rows, a], nxt.rh_indoor[rows, a], nxt.t_wall_left[:, 0],
                              nxt.t_wall_right[:, 0])
    if not ok.any():
        raise Infeasible(0, None, "no comfortable action sequence for this scenario")
    idx = np.flatnonzero(ok)
    best = idx[np.argmin(total[idx])]
    return _replay(env, scenario, seqs[best])
