"""Adversarial fuzz of the supervisor on the 2D cart.

Runs each seed unsupervised, supervised with the input-constrained sets the
bundled scenarios use, and supervised with the position-only sets.
"""
import argparse

from setguard.design import SUPERVISOR_DESIGN, CartDesign, design_sets
from setguard.scenario import adversarial_scenario, max_abs_position, run_scenario
from setguard.supervisor import SupervisorConfig


def fuzz(design, n):
    sets = design_sets(design)
    cfg = SupervisorConfig(sets.s_inf, sets.o_inf, sets.gain)
    sup, base = [], []
    for seed in range(n):
        sc = adversarial_scenario(seed, sets.s_inf)
        sup.append(max_abs_position(run_scenario(sc, cfg)))
        base.append(max_abs_position(run_scenario(sc, None)))
    return sets.attenuation.alpha, sup, base


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=100)
    args = ap.parse_args()
    for label, design in (("input-constrained", SUPERVISOR_DESIGN), ("position-only", CartDesign())):
        alpha, sup, base = fuzz(design, args.n)
        bad = sum(p >= 0.4 for p in sup)
        print(f"{label:18s} alpha={alpha:.6f}  supervised violations {bad}/{args.n} "
              f"(worst |p| {max(sup):.4f})  unsupervised violations {sum(p >= 0.4 for p in base)}/{args.n}")
