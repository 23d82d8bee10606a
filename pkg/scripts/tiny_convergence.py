"""GBPI on the enumerable test MDP against the DP optimum, for a sweep of step multipliers.

Writes one CSV row per (gradient mode, cost_scale) with the final cost, the
relative gap to DP, iterations and wall time.
"""

import argparse
import csv
import time

from hvac_gbpi.config import build_env, tiny_config
from hvac_gbpi.gbpi import GbpiConfig, run_gbpi
from hvac_gbpi.oracle import quantized_mdp, solve_dp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0, help="weather seed of the test MDP")
    ap.add_argument("--scales", type=float, nargs="+", default=[100.0, 300.0, 1e3, 3e3, 1e4])
    ap.add_argument("--iterations", type=int, default=600)
    ap.add_argument("--mc-paths", type=int, default=10_000)
    ap.add_argument("--mc-iterations", type=int, default=40)
    ap.add_argument("--out", default="tiny_convergence.csv")
    args = ap.parse_args()

    mdp = quantized_mdp(build_env(tiny_config(args.seed)))
    _, v = solve_dp(mdp)
    v_star = float(mdp.initial @ v[0])
    print(f"DP optimum {v_star:.6f}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "cost_scale", "final_cost", "rel_gap", "iterations", "seconds"])
        for exact in (True, False):
            for scale in args.scales:
                cfg = GbpiConfig(n_paths=args.mc_paths, epsilon=1e-12, cost_scale=scale, seed=args.seed,
                                 max_iterations=args.iterations if exact else args.mc_iterations)
                start = time.perf_counter()
                res = run_gbpi(mdp.uniform_policy(), mdp, cfg, exact=exact)
                cost = mdp.expected_cost(res.policy)
                row = ["exact" if exact else "mc", scale, cost, (cost - v_star) / v_star, len(res.trace) - 1,
                       time.perf_counter() - start]
                w.writerow(row)
                print(*row, sep="\t", flush=True)


if __name__ == "__main__":
    main()
