"""Return probability of the lamplighter walk on Z_2 wr Z.

Each step switches the lamp at the current site, moves, and switches again.
The walk returns to the identity only if the base walk comes home and every
lamp it touched is off, so q^(n)(e) is a range-penalized bridge probability
with penalty log 2.  Exact values are compared with brute-force enumeration
for small n and with Monte Carlo for a larger lamp group.

    python3 demos/lamplighter.py
"""
import argparse
import math

from stablewalk import steplaw as sl
from stablewalk.wreath import LampGroupModel, wreath_exact_enum, wreath_exact_z2z, wreath_return_estimate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--replicas", type=int, default=20000)
    args = ap.parse_args()

    base = sl.simple_random_walk()
    z2 = LampGroupModel.z2_uniform()
    print("exact (bridge-range formula) vs enumeration of all lamp configurations")
    for n in (2, 4, 6, 8):
        print(f"  n={n:2d}  {wreath_exact_z2z(base, n):.12e}  {wreath_exact_enum(base, z2, n):.12e}")

    print("\nstretched-exponential decay, -log q / n^(1/3):")
    for n in (100, 200, 400, 800):
        q = wreath_exact_z2z(base, n)
        print(f"  n={n:4d}  q={q:.4e}  ratio={-math.log(q) / n ** (1 / 3):.4f}")

    z3 = LampGroupModel.cyclic(3, [0.5, 0.25, 0.25])
    lazy = sl.lazy_nearest_neighbor(0.5)
    n = 6
    exact = wreath_exact_enum(lazy, z3, n)
    mc = wreath_return_estimate(lazy, z3, n, (0,), args.replicas, args.seed)
    z = (mc.mean - exact) / mc.stderr
    print(f"\nZ_3 lamps, lazy base, n={n}: exact {exact:.6f}, Monte Carlo {mc.mean:.6f} +- {mc.stderr:.6f} (z={z:+.2f})")


if __name__ == "__main__":
    main()
