"""Regenerate bessel_kv_reference.csv with arbitrary-precision values.

Run once, before the main build, with mpmath installed:

    python tests/data/gen_bessel_reference.py

The table covers 500 (nu, z) pairs with nu in (0, 5] and z in (1e-3, 30]:
425 seeded random pairs (nu uniform, z log-uniform) plus a deliberate block
of half-integer orders so both evaluation paths are exercised.  Values are
K_nu(z) at 50 significant digits, rounded to double precision.
"""

import csv
import math
import random

import mpmath

mpmath.mp.dps = 50


def main():
    random.seed(20240611)
    pairs = []
    half_orders = [0.5, 1.5, 2.5, 3.5, 4.5]
    half_args = [1e-3, 0.01, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 5.0, 10.0, 20.0, 30.0]
    for nu in half_orders:
        for z in half_args:
            pairs.append((nu, z))
    n_random = 500 - len(pairs)
    for _ in range(n_random):
        nu = random.uniform(1e-6, 5.0)
        z = 10 ** random.uniform(math.log10(1.001e-3), math.log10(30.0))
        pairs.append((nu, z))
    with open("tests/data/bessel_kv_reference.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["nu", "z", "k_nu"])
        for nu, z in pairs:
            value = float(mpmath.besselk(mpmath.mpf(repr(nu)), mpmath.mpf(repr(z))))
            writer.writerow([format(nu, ".17g"), format(z, ".17g"), format(value, ".17g")])
    print(f"wrote {len(pairs)} reference rows")


if __name__ == "__main__":
    main()
