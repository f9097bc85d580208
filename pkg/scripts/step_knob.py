"""How many gradient steps are worth paying for?

Sweeps ``gd_steps`` for PGD and HB on a synthetic suite and reports the mean
initial lower bound, the mean expansions to a target gap and the total time.

    python scripts/step_knob.py --steps 0,1,5,10,25
"""
import argparse
import statistics
import time

from lineage_bounds import EngineConfig, Heuristic, Strategy, run
from synthetic_convergence import suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=60)
    ap.add_argument("--steps", default="0,1,5,10,25")
    ap.add_argument("--gap", type=float, default=0.01)
    args = ap.parse_args()

    instances = suite(args.instances, 0.7, 22)
    print("strategy,gd_steps,mean_initial_lower,mean_expansions,total_ms")
    for s in (Strategy.PGD, Strategy.HB):
        for k in (int(x) for x in args.steps.split(",")):
            lows, exps = [], []
            t = time.perf_counter()
            for i, (vt, f) in enumerate(instances):
                cfg = EngineConfig(strategy=s, heuristic=Heuristic.INFLUENCE, gd_steps=k, eps_abs=args.gap, rng_seed=i)
                tr = run(f, vt, cfg)
                lows.append(tr.records[0].lower)
                exps.append(tr.final.expansions)
            ms = 1e3 * (time.perf_counter() - t)
            print(f"{s.value},{k},{statistics.mean(lows):.6f},{statistics.mean(exps):.2f},{ms:.0f}")


if __name__ == "__main__":
    main()
