"""Calibration probe for the shipped per-scenario environment profiles.

Prints each scenario's static landscape and the acceptance-relevant rate
ratios at a reduced realization count, so profile changes can be vetted
quickly before running the full acceptance suite. Not part of the tests.
"""

import time
from fractions import Fraction

import numpy as np

from beamband.scenarios import (EngineSpec, aggregate, evaluate_static_policies,
                                make_config, run_policy, run_scenario_i,
                                run_scenario_ii, run_scenario_iii,
                                slots_to_reach)

REALIZATIONS = 100
THREADS = 2


def main():
    t0 = time.time()
    cfg1 = make_config(1, realizations=REALIZATIONS, seed=42)
    ev = evaluate_static_policies(cfg1, threads=THREADS)
    rnd = float(np.mean(list(ev.mean_gbps.values())))
    rel = {f"{a[0]:g}ms": round(ev.mean_gbps[a] / ev.genius_mean_gbps, 3)
           for a in ev.arms}
    print(f"S1 genius={ev.genius_arm[0]:g}ms rel={rel} "
          f"genius/random={ev.genius_mean_gbps / rnd:.3f} "
          f"gap={(ev.genius_mean_gbps - ev.worst_mean_gbps) / ev.genius_mean_gbps:.3f}")
    gtail = aggregate(run_policy(cfg1, EngineSpec(engine="static", arm=ev.genius_arm),
                                 "genius", threads=THREADS)).tail_mean_gbps
    tails = {p: aggregate(run_scenario_i(cfg1, p, static_norm_means=ev.norm_means,
                                         threads=THREADS)).tail_mean_gbps
             for p in ("random", "ucb1", "klucb", "ts", "tsbeta")}
    for p in ("ucb1", "klucb", "ts", "tsbeta"):
        print(f"   {p:>6}: vsRandom={tails[p] / tails['random']:.3f} (>=1.15)  "
              f"vsGenius={tails[p] / gtail:.3f} (>=0.95)")

    cfg2 = make_config(2, realizations=REALIZATIONS, seed=42)
    m = aggregate(run_scenario_ii(cfg2, "mcts", threads=THREADS))
    f = aggregate(run_scenario_ii(cfg2, "flat", threads=THREADS))
    r = aggregate(run_scenario_ii(cfg2, "random", threads=THREADS))
    tm = slots_to_reach(m.per_slot_mean_gbps, 0.9, m.tail_mean_gbps)
    tf = slots_to_reach(f.per_slot_mean_gbps, 0.9, f.tail_mean_gbps)
    print(f"S2 mcts/flat={m.tail_mean_gbps / f.tail_mean_gbps:.3f} (>=1.10)  "
          f"mcts/random={m.tail_mean_gbps / r.tail_mean_gbps:.3f} (>=1.50)  "
          f"t90 {tm} < {tf}")

    ch = make_config(3, realizations=REALIZATIONS, seed=42, ratio=Fraction(1, 2))
    cf = make_config(3, realizations=REALIZATIONS, seed=42, ratio=Fraction(1))
    h = aggregate(run_scenario_iii(ch, "mcts", threads=THREADS))
    f3 = aggregate(run_scenario_iii(cf, "mcts", threads=THREADS))
    r3 = aggregate(run_scenario_iii(ch, "random", threads=THREADS))
    print(f"S3 half/full={h.tail_mean_gbps / f3.tail_mean_gbps:.3f} (>=1.10)  "
          f"half/random={h.tail_mean_gbps / r3.tail_mean_gbps:.3f} (>=2.0)")
    print(f"[{time.time() - t0:.0f}s]")


if __name__ == "__main__":
    main()
