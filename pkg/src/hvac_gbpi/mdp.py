"""Discretised HVAC MDP: index spaces, stochastic policy tables and simulated days.

The policy sees quantised levels while the simulator carries the continuous
room state underneath. Rollouts are vectorised over sample paths; comfort
masking is applied in waves, once per stage, by a single writer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comfort import ComfortBand, comfort_excess, mean_radiant_temp, pmv
from .markov import LevelGrid, MarkovChainSet, sample_levels
from .thermal import (DT, ContinuousState, ControlInput, ExogenousSample, HvacParams, RoomParams,
                      energy_cost, hvac_power, step_dynamics)


PMV_AIR_RANGE = (5.0, 45.0)


class OutOfRange(IndexError):
    pass


class DeadState(RuntimeError):
    """A policy row has no weight left to sample from."""


class Infeasible(RuntimeError):
    def __init__(self, stage, state, msg="no comfortable action at visited state"):
        super().__init__(f"{msg} (stage {stage}, state {state})")
        self.stage = stage
        self.state = state


# -- index spaces -------------------------------------------------------------

@dataclass(frozen=True)
class ActionSpace:
    fau_flows: tuple[float, ...]
    fau_temps: tuple[float, ...]
    fcu_flows: tuple[float, ...]
    fcu_temps: tuple[float, ...]

    @classmethod
    def grid(cls, hvac: HvacParams, flow_levels: int, temps=None) -> ActionSpace:
        """Flows split equally into ``flow_levels`` levels; ``temps`` fixes the set-point choices."""
        temps_fau = temps_fcu = None
        if temps is not None:
            temps_fau = temps_fcu = tuple(float(x) for x in temps)
        return cls(tuple(np.linspace(*hvac.fau_flow_bounds, flow_levels).tolist()),
                   temps_fau or (float(hvac.fau_temp_bounds[0]),),
                   tuple(np.linspace(*hvac.fcu_flow_bounds, flow_levels).tolist()),
                   temps_fcu or (float(hvac.fcu_temp_bounds[0]),))

    @property
    def shape(self):
        return len(self.fau_flows), len(self.fau_temps), len(self.fcu_flows), len(self.fcu_temps)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def decode(self, idx) -> ControlInput:
        idx = np.asarray(idx)
        if np.any(idx < 0) or np.any(idx >= self.size):
            raise OutOfRange(f"action index outside [0, {self.size})")
        i, j, k, m = np.unravel_index(idx, self.shape)
        out = (np.asarray(self.fau_flows)[i], np.asarray(self.fau_temps)[j],
               np.asarray(self.fcu_flows)[k], np.asarray(self.fcu_temps)[m])
        if idx.ndim == 0:
            out = tuple(float(x) for x in out)
        return ControlInput(*out)

    def encode(self, u: ControlInput) -> int:
        try:
            parts = [tuple_levels.index(float(v)) for tuple_levels, v in
                     zip((self.fau_flows, self.fau_temps, self.fcu_flows, self.fcu_temps),
                         (u.g_fau, u.t_fau, u.g_fcu, u.t_fcu))]
        except ValueError:
            raise OutOfRange("control is not on the action grid") from None
        return int(np.ravel_multi_index(parts, self.shape))

    def controls(self) -> ControlInput:
        """All actions as one ControlInput of length-``size`` arrays."""
        return self.decode(np.arange(self.size))


@dataclass(frozen=True)
class StateSpace:
    """Five-component state (outdoor temp, outdoor rh, indoor temp, indoor rh, occupancy).

    ``windows[t, c]`` optionally restricts outdoor temperature (c=0) and
    humidity (c=1) levels at stage t to an inclusive range; levels outside it
    map to the nearest active level.
    """

    t_out: LevelGrid
    rh_out: LevelGrid
    t_in: LevelGrid
    rh_in: LevelGrid
    occ_levels: int
    max_occupants: float = 5.0
    windows: np.ndarray | None = None

    @property
    def shape(self):
        return (self.t_out.count, self.rh_out.count, self.t_in.count, self.rh_in.count, self.occ_levels)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def occupants(self) -> np.ndarray:
        return np.linspace(0.0, self.max_occupants, self.occ_levels)

    def _window(self, t, comp, level):
        if self.windows is None or t is None:
            return level
        lo, hi = self.windows[t, comp]
        return np.clip(level, lo, hi)

    def encode(self, levels, t: int | None = None):
        levels = [np.asarray(x, dtype=np.int64) for x in levels]
        for x, n in zip(levels, self.shape):
            if np.any(x < 0) or np.any(x >= n):
                raise OutOfRange("state level outside its grid")
        levels[0] = self._window(t, 0, levels[0])
        levels[1] = self._window(t, 1, levels[1])
        idx = np.ravel_multi_index(levels, self.shape)
        return int(idx) if np.ndim(idx) == 0 else idx

    def decode(self, idx):
        idx = np.asarray(idx)
        if np.any(idx < 0) or np.any(idx >= self.size):
            raise OutOfRange(f"state index outside [0, {self.size})")
        out = np.unravel_index(idx, self.shape)
        return tuple(int(x) for x in out) if idx.ndim == 0 else out

    def quantize(self, t, to_level, ho_level, t_in, rh_in, occ_level):
        return self.encode((to_level, ho_level, self.t_in.level(t_in), self.rh_in.level(rh_in), occ_level), t)

    def active_states(self, t: int) -> np.ndarray:
        """Flat indices of the states the policy can see at stage t."""
        ranges = [np.arange(n) for n in self.shape]
        if self.windows is not None:
            for comp in (0, 1):
                lo, hi = self.windows[t, comp]
                ranges[comp] = np.arange(lo, hi + 1)
        mesh = np.meshgrid(*ranges, indexing="ij")
        return np.sort(np.ravel_multi_index([m.ravel() for m in mesh], self.shape))


def windows_from_levels(temp_levels: np.ndarray, humid_levels: np.ndarray, temp_count: int,
                        humid_count: int, margin: int = 1) -> np.ndarray:
    """Per-stage level windows: observed min/max over the days, widened by ``margin``."""
    out = np.empty((temp_levels.shape[1], 2, 2), dtype=np.int64)
    for comp, (lv, n) in enumerate(((temp_levels, temp_count), (humid_levels, humid_count))):
        out[:, comp, 0] = np.maximum(lv.min(axis=0) - margin, 0)
        out[:, comp, 1] = np.minimum(lv.max(axis=0) + margin, n - 1)
    return out


# -- policy -------------------------------------------------------------------

class StochasticPolicy:
    """Per-stage table of non-negative action weights for the states that have rows.

    Rows are kept sorted by state index. A row's mass (its sum) is the quantity
    the policy update preserves; sampling normalises by it.
    """

    def __init__(self, n_stages: int, n_actions: int):
        self.n_stages = n_stages
        self.n_actions = n_actions
        self._states = [np.zeros(0, dtype=np.int64) for _ in range(n_stages)]
        self._weights = [np.zeros((0, n_actions)) for _ in range(n_stages)]

    @classmethod
    def uniform(cls, n_stages, n_actions, n_states) -> StochasticPolicy:
        return cls.from_dense(np.full((n_stages, n_states, n_actions), 1.0 / n_actions))

    @classmethod
    def from_dense(cls, table) -> StochasticPolicy:
        table = np.asarray(table, dtype=float)
        pol = cls(table.shape[0], table.shape[2])
        for t in range(table.shape[0]):
            pol._states[t] = np.arange(table.shape[1], dtype=np.int64)
            pol._weights[t] = table[t].copy()
        return pol

    def dense(self, n_states: int) -> np.ndarray:
        out = np.zeros((self.n_stages, n_states, self.n_actions))
        for t in range(self.n_stages):
            out[t, self._states[t]] = self._weights[t]
        return out

    def copy(self) -> StochasticPolicy:
        new = StochasticPolicy(self.n_stages, self.n_actions)
        new._states = [s.copy() for s in self._states]
        new._weights = [w.copy() for w in self._weights]
        return new

    def states(self, t: int) -> np.ndarray:
        return self._states[t]

    def weights(self, t: int) -> np.ndarray:
        """All rows of stage t (a view; callers own mutation discipline)."""
        return self._weights[t]

    def positions(self, t: int, states) -> np.ndarray:
        """Row positions for ``states``; -1 where a state has no row."""
        states = np.asarray(states, dtype=np.int64)
        known = self._states[t]
        pos = np.searchsorted(known, states)
        pos = np.minimum(pos, max(len(known) - 1, 0))
        hit = (len(known) > 0) & (known[pos] == states) if len(known) else np.zeros(states.shape, bool)
        return np.where(hit, pos, -1)

    def has_rows(self, t: int, states) -> np.ndarray:
        return self.positions(t, states) >= 0

    def rows(self, t: int, states) -> np.ndarray:
        pos = self.positions(t, states)
        if np.any(pos < 0):
            raise KeyError(f"stage {t}: no row for some states")
        return self._weights[t][pos]

    def row(self, t: int, state: int) -> np.ndarray:
        return self.rows(t, np.array([state]))[0]

    def mass(self, t: int, states) -> np.ndarray:
        return self.rows(t, states).sum(axis=-1)

    def set_rows(self, t: int, states, weights):
        """Insert or overwrite rows."""
        states = np.asarray(states, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=float).reshape(len(states), self.n_actions)
        pos = self.positions(t, states)
        old = pos >= 0
        self._weights[t][pos[old]] = weights[old]
        if np.any(~old):
            new_states, first = np.unique(states[~old], return_index=True)
            merged = np.concatenate([self._states[t], new_states])
            order = np.argsort(merged, kind="stable")
            self._states[t] = merged[order]
            self._weights[t] = np.concatenate([self._weights[t], weights[~old][first]])[order]

    def n_rows(self) -> int:
        return sum(len(s) for s in self._states)

    def iter_rows(self):
        for t in range(self.n_stages):
            for s, w in zip(self._states[t], self._weights[t]):
                yield t, int(s), w

    def same_as(self, other: StochasticPolicy) -> bool:
        if (self.n_stages, self.n_actions) != (other.n_stages, other.n_actions):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self._states, other._states)) and \
            all(np.array_equal(a, b) for a, b in zip(self._weights, other._weights))


def draw_actions(rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Categorical draw per row, proportional to the weights; -1 for all-zero rows."""
    rows = np.atleast_2d(rows)
    total = rows.sum(axis=1)
    cdf = np.cumsum(rows, axis=1)
    u = rng.random(len(rows)) * total
    idx = (u[:, None] >= cdf).sum(axis=1)
    # u can land on the last edge through rounding; fall back to the last positive entry
    last_pos = rows.shape[1] - 1 - np.argmax((rows > 0)[:, ::-1], axis=1)
    idx = np.minimum(idx, last_pos)
    return np.where(total > 0, idx, -1)


def sample_action(policy: StochasticPolicy, t: int, state: int, rng: np.random.Generator) -> int:
    row = policy.row(t, state)
    if not row.sum() > 0:
        raise DeadState(f"stage {t}, state {state}: every action is masked")
    return int(draw_actions(row[None, :], rng)[0])


def mask_infeasible(policy: StochasticPolicy, t: int, state: int, action: int) -> StochasticPolicy:
    """Zero one entry and rescale the survivors so the row keeps its mass."""
    _mask_pairs(policy, t, np.array([state]), np.array([action]))
    return policy


def _mask_pairs(policy: StochasticPolicy, t: int, states: np.ndarray, actions: np.ndarray):
    if len(states) == 0:
        return
    pos = policy.positions(t, states)
    if np.any(pos < 0):
        raise KeyError("masking a state without a row")
    w = policy.weights(t)
    rows = np.unique(pos)
    mass = w[rows].sum(axis=1)
    w[pos, actions] = 0.0
    left = w[rows].sum(axis=1)
    scale = np.where(left > 0, mass / np.where(left > 0, left, 1.0), 1.0)
    w[rows] *= scale[:, None]


# -- sample paths -------------------------------------------------------------

@dataclass(frozen=True)
class StageRecord:
    stage: int
    state: int
    action: int
    cost: float
    pmv: float
    comfortable: bool


@dataclass(frozen=True)
class SamplePath:
    records: tuple[StageRecord, ...]

    def __len__(self):
        return len(self.records)

    @property
    def total_cost(self) -> float:
        return float(sum(r.cost for r in self.records))


@dataclass
class PathBatch:
    """``n`` simulated days as (n, T) arrays; ``feasible`` marks paths with no forced violation."""

    states: np.ndarray
    actions: np.ndarray
    costs: np.ndarray
    pmv: np.ndarray
    comfort: np.ndarray
    feasible: np.ndarray
    t_indoor: np.ndarray | None = None  # (n, T+1)
    rh_indoor: np.ndarray | None = None

    def __len__(self):
        return self.states.shape[0]

    def path(self, i: int) -> SamplePath:
        return SamplePath(tuple(
            StageRecord(t, int(self.states[i, t]), int(self.actions[i, t]), float(self.costs[i, t]),
                        float(self.pmv[i, t]), bool(self.comfort[i, t]))
            for t in range(self.states.shape[1])))

    def subset(self, keep) -> PathBatch:
        pick = lambda a: None if a is None else a[keep]  # noqa: E731
        return PathBatch(self.states[keep], self.actions[keep], self.costs[keep], self.pmv[keep],
                         self.comfort[keep], self.feasible[keep], pick(self.t_indoor), pick(self.rh_indoor))


@dataclass(frozen=True)
class Scenarios:
    """Exogenous levels for ``n`` days, each (n, T)."""

    temp: np.ndarray
    humid: np.ndarray
    occ: np.ndarray

    def __len__(self):
        return self.temp.shape[0]

    def day(self, i: int) -> Scenarios:
        return Scenarios(self.temp[i:i + 1], self.humid[i:i + 1], self.occ[i:i + 1])


@dataclass(frozen=True)
class PmvSettings:
    metabolic_rate: float = 1.0
    mechanical_work: float = 0.0
    air_velocity: float = 0.2
    clothing: float = 1.0  # clo


# -- HVAC environment ---------------------------------------------------------

@dataclass
class HvacMdp:
    room: RoomParams
    hvac: HvacParams
    states: StateSpace
    actions: ActionSpace
    chains: MarkovChainSet
    price: np.ndarray  # (T,) currency/kWh
    solar: np.ndarray  # (T,) W/m2
    band: ComfortBand = field(default_factory=ComfortBand)
    pmv_settings: PmvSettings = field(default_factory=PmvSettings)
    device_heat: float = 100.0
    dt: float = DT
    initial_state: ContinuousState | None = None
    initial_levels: tuple[int, int, int] = (0, 0, 0)
    init_temp_band: tuple[float, float] | None = (23.0, 28.0)
    init_rh_band: tuple[float, float] | None = (0.40, 0.70)
    penalty: float = 0.0

    def __post_init__(self):
        self.price = np.asarray(self.price, dtype=float)
        self.solar = np.asarray(self.solar, dtype=float)
        if self.price.shape != (self.n_stages,) or self.solar.shape != (self.n_stages,):
            raise ValueError("price and solar need one value per stage")
        if np.any(self.price < 0) or np.any(self.solar < 0):
            raise ValueError("price and solar must be non-negative")
        if self.initial_state is None:
            t0 = float(self.states.t_in.value(self.states.t_in.count // 2))
            self.initial_state = ContinuousState(t0, float(self.states.rh_in.value(self.states.rh_in.count // 2)),
                                                 t0, t0)
        if self.penalty <= 0:
            self.penalty = default_penalty(self)
        self._controls = self.actions.controls()

    @property
    def n_stages(self) -> int:
        return self.chains.n_stages

    @property
    def n_actions(self) -> int:
        return self.actions.size

    # physics over (paths, actions) grids
    def exogenous(self, t: int, temp_lv, humid_lv, occ_lv) -> ExogenousSample:
        return ExogenousSample(self.states.t_out.value(temp_lv), self.states.rh_out.value(humid_lv),
                               self.states.occupants[np.asarray(occ_lv)], self.solar[t], self.device_heat,
                               self.price[t])

    def outcomes(self, t: int, state: ContinuousState, exo: ExogenousSample):
        """Next state, PMV after the step and energy cost for every action; arrays are (n, A)."""
        col = lambda x: np.asarray(x, dtype=float)[..., None]  # noqa: E731
        st = ContinuousState(col(state.t_indoor), col(state.rh_indoor), col(state.t_wall_left),
                             col(state.t_wall_right))
        ex = ExogenousSample(col(exo.t_outdoor), col(exo.rh_outdoor), col(exo.occupants),
                             exo.solar_wall, exo.device_heat_per_occupant, exo.price)
        nxt = step_dynamics(st, ex, self._controls, self.room, self.hvac, self.dt)
        ps = self.pmv_settings
        # far outside comfort the vote is pinned at the scale ends; clipping keeps the iteration stable
        t_eval = np.clip(nxt.t_indoor, PMV_AIR_RANGE[0], PMV_AIR_RANGE[1])
        value = pmv(t_eval, nxt.rh_indoor, mean_radiant_temp(t_eval), ps.air_velocity,
                    ps.metabolic_rate, ps.clothing, ps.mechanical_work)
        cost = energy_cost(hvac_power(st, ex, self._controls, self.room, self.hvac), self.price[t],
                           self.hvac.eta, self.dt)
        return nxt, np.asarray(value), np.broadcast_to(cost, np.shape(value))

    def initial_rows(self, t: int, states) -> np.ndarray:
        """Initial weights: uniform, zeroed where the one-step result from the state's
        midpoint leaves the initial temperature/humidity bands. Rows that would be
        empty stay uniform."""
        states = np.asarray(states, dtype=np.int64)
        rows = np.ones((len(states), self.n_actions))
        if len(states) and (self.init_temp_band is not None or self.init_rh_band is not None):
            to, ho, ti, hi, oc = self.states.decode(states)
            t_in = self.states.t_in.value(ti)
            here = ContinuousState(t_in, self.states.rh_in.value(hi), t_in, t_in)
            nxt, _, _ = self.outcomes(t, here, self.exogenous(t, to, ho, oc))
            keep = np.ones(rows.shape, dtype=bool)
            if self.init_temp_band is not None:
                keep &= (nxt.t_indoor >= self.init_temp_band[0]) & (nxt.t_indoor <= self.init_temp_band[1])
            if self.init_rh_band is not None:
                keep &= (nxt.rh_indoor >= self.init_rh_band[0]) & (nxt.rh_indoor <= self.init_rh_band[1])
            keep[~keep.any(axis=1)] = True
            rows = keep.astype(float)
        return rows / rows.sum(axis=1, keepdims=True)

    def initial_policy(self, states_per_stage=None) -> StochasticPolicy:
        pol = StochasticPolicy(self.n_stages, self.n_actions)
        if states_per_stage is not None:
            for t, sts in enumerate(states_per_stage):
                pol.set_rows(t, sts, self.initial_rows(t, sts))
        return pol

    def ensure_rows(self, policy: StochasticPolicy, t: int, states):
        missing = np.unique(np.asarray(states)[~policy.has_rows(t, states)])
        if len(missing):
            policy.set_rows(t, missing, self.initial_rows(t, missing))

    # scenarios and simulation
    def sample_scenarios(self, n: int, rng) -> Scenarios:
        rng = np.random.default_rng(rng)
        t0, h0, o0 = self.initial_levels
        return Scenarios(sample_levels(self.chains.temp, t0, rng, n), sample_levels(self.chains.humid, h0, rng, n),
                         sample_levels(self.chains.occ, o0, rng, n))

    def simulate(self, policy: StochasticPolicy, n: int, rng, regenerate: bool = True,
                 scenarios: Scenarios | None = None) -> PathBatch:
        """Simulate ``n`` days under ``policy``.

        With ``regenerate`` the policy is updated in place: an action that breaks the
        comfort band at a visited state is masked and a new one drawn, until the band
        holds. If a row runs dry, its least-bad action for the current room state is
        restored and the path is marked infeasible. Without ``regenerate`` the policy
        is only read (missing rows use the initial weights) and violations are recorded.
        """
        rng = np.random.default_rng(rng)
        if scenarios is None:
            scenarios = self.sample_scenarios(n, rng)
        n = len(scenarios)
        T, A = self.n_stages, self.n_actions
        pol = policy if regenerate else policy.copy()
        s0 = self.initial_state
        cur = ContinuousState(*(np.full(n, float(getattr(s0, f))) for f in
                                ("t_indoor", "rh_indoor", "t_wall_left", "t_wall_right")))
        out = {k: np.zeros((n, T), dtype=d) for k, d in
               (("states", np.int64), ("actions", np.int64), ("costs", float), ("pmv", float), ("comfort", bool))}
        t_in = np.zeros((n, T + 1))
        rh_in = np.zeros((n, T + 1))
        t_in[:, 0], rh_in[:, 0] = cur.t_indoor, cur.rh_indoor
        feasible = np.ones(n, dtype=bool)
        paths = np.arange(n)

        for t in range(T):
            lv = (scenarios.temp[:, t], scenarios.humid[:, t], scenarios.occ[:, t])
            s = self.states.quantize(t, lv[0], lv[1], cur.t_indoor, cur.rh_indoor, lv[2])
            self.ensure_rows(pol, t, s)
            nxt, value, cost = self.outcomes(t, cur, self.exogenous(t, *lv))
            ok = (value >= self.band.pmv_low) & (value <= self.band.pmv_high)
            chosen = np.full(n, -1, dtype=np.int64)
            pending = paths
            while len(pending):
                a = draw_actions(pol.rows(t, s[pending]), rng)
                dead = a < 0
                if not regenerate:
                    good = ~dead
                else:
                    good = ~dead & ok[pending, np.maximum(a, 0)]
                chosen[pending[good]] = a[good]
                bad = ~good & ~dead
                if regenerate and np.any(bad):
                    pairs = np.unique(np.stack([s[pending[bad]], a[bad]]), axis=1)
                    _mask_pairs(pol, t, pairs[0], pairs[1])
                if np.any(dead):
                    for i in pending[dead]:
                        best = self._least_bad(value[i], cost[i])
                        if regenerate:
                            row = np.zeros(A)
                            row[best] = 1.0
                            pol.set_rows(t, [s[i]], row[None, :])
                        chosen[i] = best
                        feasible[i] &= bool(ok[i, best])
                pending = pending[chosen[pending] < 0]
            out["states"][:, t] = s
            out["actions"][:, t] = chosen
            out["costs"][:, t] = cost[paths, chosen]
            out["pmv"][:, t] = value[paths, chosen]
            out["comfort"][:, t] = ok[paths, chosen]
            cur = ContinuousState(nxt.t_indoor[paths, chosen], nxt.rh_indoor[paths, chosen],
                                  nxt.t_wall_left[:, 0], nxt.t_wall_right[:, 0])
            t_in[:, t + 1], rh_in[:, t + 1] = cur.t_indoor, cur.rh_indoor
        if not regenerate:
            feasible = out["comfort"].all(axis=1)
        return PathBatch(out["states"], out["actions"], out["costs"], out["pmv"], out["comfort"],
                         feasible, t_in, rh_in)

    def _least_bad(self, values: np.ndarray, costs: np.ndarray) -> int:
        excess = comfort_excess(values, self.band)
        return int(np.lexsort((costs, excess))[0])


def default_penalty(env: HvacMdp) -> float:
    """Ten times the priciest plausible day: every action at its hottest, most humid load."""
    hot = ContinuousState(40.0, 1.0, 40.0, 40.0)
    exo = ExogenousSample(40.0, 1.0, env.states.max_occupants, 0.0, env.device_heat, 1.0)
    power = hvac_power(hot, exo, env.actions.controls(), env.room, env.hvac)
    kw = float(np.max(power.electric(env.hvac.eta)))
    return 10.0 * float(np.max(env.price)) * kw * env.n_stages * env.dt / 3600.0


def rollout(policy: StochasticPolicy, env: HvacMdp, rng, regenerate: bool = True,
            scenario: Scenarios | None = None) -> SamplePath:
    """One simulated day; raises Infeasible if a visited state had no comfortable action."""
    batch = env.simulate(policy, 1, rng, regenerate=regenerate, scenarios=scenario)
    if regenerate and not batch.feasible[0]:
        bad = int(np.argmin(batch.comfort[0]))
        raise Infeasible(bad, int(batch.states[0, bad]))
    return batch.path(0)


@dataclass(frozen=True)
class EvaluationSummary:
    costs: np.ndarray  # energy cost per scenario
    penalized: np.ndarray  # energy plus penalty per uncomfortable stage
    comfort_frequency: float  # fraction of stages inside the band
    day_comfort_frequency: float  # fraction of days with no violation
    pmv: np.ndarray  # (n, T)

    @property
    def mean(self) -> float:
        return float(self.costs.mean())

    @property
    def std(self) -> float:
        return float(self.costs.std(ddof=1)) if len(self.costs) > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.std / np.sqrt(len(self.costs))

    def quantiles(self, qs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict[float, float]:
        return {q: float(np.quantile(self.costs, q)) for q in qs}

    def histogram(self, bins: int = 20):
        return np.histogram(self.costs, bins=bins)

    def as_dict(self) -> dict:
        return {"n": len(self.costs), "mean_cost": self.mean, "std_cost": self.std,
                "mean_penalized": float(self.penalized.mean()),
                "quantiles": {f"q{int(q * 100):02d}": v for q, v in self.quantiles().items()},
                "comfort_frequency": self.comfort_frequency,
                "day_comfort_frequency": self.day_comfort_frequency}


def summarize(batch: PathBatch, penalty: float) -> EvaluationSummary:
    costs = batch.costs.sum(axis=1)
    penalized = costs + penalty * (~batch.comfort).sum(axis=1)
    return EvaluationSummary(costs, penalized, float(batch.comfort.mean()),
                             float(batch.comfort.all(axis=1).mean()), batch.pmv)


def evaluate_policy(policy: StochasticPolicy, env, n_scenarios: int, rng, regenerate: bool = False,
                    scenarios: Scenarios | None = None) -> EvaluationSummary:
    """Monte Carlo cost and comfort statistics; ``env`` is any object with ``simulate``."""
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be at least 1")
    batch = env.simulate(policy, n_scenarios, rng, regenerate=regenerate, scenarios=scenarios)
    return summarize(batch, getattr(env, "penalty", 0.0))
