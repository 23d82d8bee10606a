"""Where the learned policy departs from the perfect-information plans.

Replays each oracle plan, quantizes the visited room states and reports how
many of the oracle's (stage, state, action) choices the learned policy has
masked to zero, alongside mean supply flows of both controllers.
"""

import argparse

import numpy as np

from hvac_gbpi.config import preset
from hvac_gbpi.experiments import evaluation_scenarios, learn, oracle_costs
from hvac_gbpi.thermal import ContinuousState


def _column(state):
    return ContinuousState(*(np.array([float(getattr(state, f))]) for f in
                             ("t_indoor", "rh_indoor", "t_wall_left", "t_wall_right")))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--case", type=int, default=2, choices=(1, 2, 3))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scenarios", type=int, default=20)
    args = ap.parse_args()

    cfg = preset(args.case, args.seed)
    env, result = learn(cfg)
    policy = result.policy
    scenarios = evaluation_scenarios(env, args.scenarios, args.seed)
    oracle = oracle_costs(env, scenarios)

    seen = masked = 0
    fau = []
    for i, plan in enumerate(oracle.plans):
        cur = _column(env.initial_state)
        for t, a in enumerate(plan.actions):
            lv = (scenarios.temp[i, t], scenarios.humid[i, t], scenarios.occ[i, t])
            s = int(env.states.quantize(t, lv[0], lv[1], cur.t_indoor, cur.rh_indoor, lv[2])[0])
            if policy.has_rows(t, [s])[0]:
                seen += 1
                masked += int(policy.row(t, s)[a] == 0)
            nxt, _, _ = env.outcomes(t, cur, env.exogenous(t, *[np.array([x]) for x in lv]))
            cur = ContinuousState(nxt.t_indoor[:, a], nxt.rh_indoor[:, a], nxt.t_wall_left[:, 0],
                                  nxt.t_wall_right[:, 0])
            fau.append(env.actions.decode(int(a)).g_fau)
    batch = env.simulate(policy.copy(), len(scenarios), np.random.default_rng(0), regenerate=False,
                         scenarios=scenarios)
    learned = env.actions.decode(batch.actions)
    zero = sum(int((w == 0).sum()) for _, _, w in policy.iter_rows())
    print(f"oracle choices at states with policy rows: {seen}; masked to zero in the policy: {masked} "
          f"({100 * masked / max(seen, 1):.0f}%)")
    print(f"zero entries in the policy: {100 * zero / (policy.n_rows() * env.n_actions):.0f}% of {policy.n_rows()} rows")
    print(f"mean FAU flow: oracle {np.mean(fau):.4f} kg/s, policy {learned.g_fau.mean():.4f} kg/s")
    print(f"mean FCU flow: policy {learned.g_fcu.mean():.4f} kg/s")
    print(f"mean indoor temperature: oracle {np.mean([p.t_indoor.mean() for p in oracle.plans]):.2f} C, "
          f"policy {batch.t_indoor.mean():.2f} C")


if __name__ == "__main__":
    main()
