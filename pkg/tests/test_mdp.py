import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hvac_gbpi.comfort import mean_radiant_temp, pmv
from hvac_gbpi.config import build_env, preset
from hvac_gbpi.markov import MarkovChainSet
from hvac_gbpi.mdp import (ActionSpace, DeadState, Infeasible, OutOfRange, StochasticPolicy, draw_actions,
                           evaluate_policy, mask_infeasible, rollout, sample_action)
from hvac_gbpi.oracle import quantized_mdp
from hvac_gbpi.thermal import HvacParams, RoomParams
from reference import coil_loads, room_step

HVAC = HvacParams()


def test_case_action_counts():
    case1 = ActionSpace.grid(HVAC, 3, (12.0, 14.0, 16.0))
    case2 = ActionSpace.grid(HVAC, 5, (15.0,))
    assert case1.size == 81 and case2.size == 25


@pytest.mark.parametrize("space", [ActionSpace.grid(HVAC, 3, (12.0, 14.0, 16.0)), ActionSpace.grid(HVAC, 5, (15.0,))])
def test_action_codec_bijective_and_bounded(space):
    for k in range(space.size):
        u = space.decode(k)
        assert space.encode(u) == k
        assert HVAC.within_bounds(u)
    with pytest.raises(OutOfRange):
        space.decode(space.size)


def test_state_codec(tiny_env):
    states = tiny_env.states
    for idx in range(states.size):
        assert states.encode(states.decode(idx)) == idx
    with pytest.raises(OutOfRange):
        states.decode(-1)
    with pytest.raises(OutOfRange):
        states.encode((0, 0, 0, 0, 7))


@given(st.integers(0, 47))
def test_windows_keep_codec_bijective_on_active_states(t):
    env = _case2_env()
    active = env.states.active_states(t)
    assert np.array_equal(env.states.encode(env.states.decode(active), t), active)


_cache = {}


def _case2_env():
    if "env" not in _cache:
        _cache["env"] = build_env(preset(2))
    return _cache["env"]


def test_one_hot_and_masked_sampling(rng):
    pol = StochasticPolicy.uniform(1, 4, 1)
    pol.set_rows(0, [0], [[0.0, 0.0, 1.0, 0.0]])
    assert {sample_action(pol, 0, 0, rng) for _ in range(200)} == {2}


def test_uniform_frequencies(rng):
    draws = draw_actions(np.full((100_000, 4), 0.25), rng)
    freq = np.bincount(draws, minlength=4) / len(draws)
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_masking(rng):
    pol = StochasticPolicy.uniform(1, 4, 1)
    before = pol.row(0, 0).copy()
    mask_infeasible(pol, 0, 0, 1)
    assert pol.row(0, 0)[1] == 0.0
    assert pol.mass(0, [0])[0] == pytest.approx(1.0, abs=1e-15)
    again = pol.row(0, 0).copy()
    mask_infeasible(pol, 0, 0, 1)
    assert np.array_equal(pol.row(0, 0), again)
    draws = draw_actions(np.repeat(pol.row(0, 0)[None], 10_000, axis=0), rng)
    assert not np.any(draws == 1)
    for a in (0, 2):
        mask_infeasible(pol, 0, 0, a)
    assert np.array_equal(pol.row(0, 0), [0, 0, 0, before.sum()])
    mask_infeasible(pol, 0, 0, 3)
    with pytest.raises(DeadState):
        sample_action(pol, 0, 0, rng)


def _deterministic_env(env, action):
    T = env.n_stages
    chains = []
    for L in env.chains.levels:
        p = np.zeros((T - 1, L, L))
        p[:, np.arange(L), (np.arange(L) + 1) % L] = 1.0
        chains.append(p)
    env = dataclasses.replace(env, chains=MarkovChainSet(*chains), initial_levels=(0, 1, 1))
    table = np.zeros((T, env.states.size, env.n_actions))
    table[:, :, action] = 1.0
    return env, StochasticPolicy.from_dense(table)


def test_rollout_matches_hand_simulation(tiny_env):
    env, pol = _deterministic_env(tiny_env, action=7)
    path = rollout(pol, env, np.random.default_rng(0), regenerate=False)
    assert path == rollout(pol, env, np.random.default_rng(99), regenerate=False)

    room = RoomParams()
    p = dict(q_occ=room.q_occupant, h_g=room.h_glass, a_g=room.a_glass, h_w=room.h_wall, a_wl=room.a_wall_left,
             a_wr=room.a_wall_right, cp=room.cp_air, m_a=room.m_air, c_w=room.c_wall, m_wl=room.m_wall_left,
             m_wr=room.m_wall_right, alpha=room.alpha_wall, h_gen=room.h_gen)
    u = env.actions.decode(7)
    s0 = env.initial_state
    x = (s0.t_indoor, s0.rh_indoor, s0.t_wall_left, s0.t_wall_right)
    lv = list(env.initial_levels)
    sizes = env.chains.levels
    fan = 0.1 * (u.g_fcu / 0.05) ** 3 + 0.1 * (u.g_fau / 0.01) ** 3
    for t, rec in enumerate(path.records):
        to, ho = env.states.t_out.value(lv[0]), env.states.rh_out.value(lv[1])
        n = [0.0, 5.0][lv[2]]
        fcu, fau = coil_loads(x[0], x[1], to, ho, u.g_fau, u.t_fau, u.g_fcu, u.t_fcu)
        cost = env.price[t] * ((fcu + fau) / 2.7 + fan) * 0.5
        assert rec.cost == pytest.approx(cost, rel=1e-12)
        x = room_step(*x, to, ho, n, env.solar[t], 100.0, u.g_fau, u.t_fau, u.g_fcu, u.t_fcu, p)
        assert rec.pmv == pytest.approx(pmv(x[0], x[1], mean_radiant_temp(x[0])), abs=1e-4)
        lv = [(lv[i] + 1) % sizes[i] for i in range(3)]


def test_regenerated_paths_are_comfortable(tiny_env):
    pol = tiny_env.initial_policy()
    batch = tiny_env.simulate(pol, 300, np.random.default_rng(1), regenerate=True)
    ok = batch.feasible
    assert ok.mean() > 0.5
    assert np.all(batch.comfort[ok])
    assert np.all((batch.pmv[ok] >= -0.5) & (batch.pmv[ok] <= 0.5))


def test_rollout_reports_infeasible(tiny_env):
    hot = dataclasses.replace(tiny_env, initial_state=dataclasses.replace(tiny_env.initial_state, t_indoor=40.0))
    with pytest.raises(Infeasible) as info:
        rollout(hot.initial_policy(), hot, np.random.default_rng(0))
    assert info.value.stage == 0


def test_zero_price_costs_nothing(tiny_env):
    free = dataclasses.replace(tiny_env, price=np.zeros(tiny_env.n_stages))
    summary = evaluate_policy(free.initial_policy(), free, 20, np.random.default_rng(0))
    assert summary.mean == 0.0


def test_single_scenario_equals_rollout(tiny_env):
    pol = tiny_env.initial_policy()
    path = rollout(pol, tiny_env, np.random.default_rng(5), regenerate=False)
    summary = evaluate_policy(pol, tiny_env, 1, np.random.default_rng(5))
    assert summary.mean == pytest.approx(path.total_cost, rel=1e-14)


def test_monte_carlo_matches_exact_expectation(tiny_mdp):
    pol = tiny_mdp.uniform_policy()
    exact = tiny_mdp.expected_cost(pol)
    est = evaluate_policy(pol, tiny_mdp, 10_000, np.random.default_rng(2))
    assert abs(est.mean - exact) <= 3 * est.stderr


def test_quantized_mdp_is_consistent(tiny_env, tiny_mdp):
    assert tiny_mdp.cost.shape == (8, tiny_env.states.size, 9)
    assert np.allclose(tiny_mdp.p.sum(axis=3), 1.0, atol=1e-12)
    assert np.isclose(tiny_mdp.initial.sum(), 1.0)


def test_policy_rows_and_dense_round_trip(rng):
    table = rng.random((3, 5, 4))
    pol = StochasticPolicy.from_dense(table)
    assert np.array_equal(pol.dense(5), table)
    sparse = StochasticPolicy(3, 4)
    sparse.set_rows(1, [4, 2], table[1, [4, 2]])
    assert np.array_equal(sparse.states(1), [2, 4])
    assert np.array_equal(sparse.row(1, 4), table[1, 4])
    with pytest.raises(KeyError):
        sparse.rows(1, [3])
