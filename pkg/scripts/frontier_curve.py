"""Trace the oblivious lower bound along the frontier of the toy R,S,T example.

For the two copies of t2 the frontier is (1-q1)(1-q2) = 1-p.  The script
prints the bound as a function of the first copy's weight and marks the
symmetric point, the grid optimum and where PGD lands after k steps.

    python scripts/frontier_curve.py --points 21
"""
import argparse

import numpy as np

from lineage_bounds import dissociate, parse_lineage, pgd_lower
from lineage_bounds.dissociation import Assignment, Direction, bound_value
from lineage_bounds.oracle import exact_prob, frontier_probs, grid_optimal_lower

TOY = """\
var r1 0.5
var r2 0.6
var s1 0.3
var s2 0.4
var s3 0.5
var t1 0.4
var t2 0.8
formula (or (and r1 (or (and s1 t1) (and s2 t2))) (and r2 s3 t2))
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--steps", default="0,1,2,5,10,50,500")
    args = ap.parse_args()

    vt, f = parse_lineage(TOY)
    fd, cm = dissociate(f)
    copies = cm.groups["t2"]
    p = vt["t2"]

    print("w1,q1,q2,lower")
    for w in np.linspace(0.0, 1.0, args.points):
        q = frontier_probs(p, [w, 1 - w])
        val = bound_value(fd, Assignment(dict(zip(copies, q)), Direction.LOWER), vt.probs)
        print(f"{w:.3f},{q[0]:.6f},{q[1]:.6f},{val:.8f}")

    probs, grid = grid_optimal_lower(fd, cm, vt.probs, 1e-4)
    print(f"\nexact          {exact_prob(f, vt.probs):.8f}")
    print(f"grid optimum   {grid:.8f} at q = ({probs[copies[0]]:.4f}, {probs[copies[1]]:.4f})")
    for k in (int(s) for s in args.steps.split(",")):
        res = pgd_lower(fd, cm, vt.probs, steps=k)
        print(f"pgd {k:>4} steps {res.bound:.8f} at w1 = {res.point.weights['t2'][0]:.4f}")


if __name__ == "__main__":
    main()
