"""Numeric frame-bound constants for the four observable tiers.

Run: python demos/03_frame_bounds.py   (about a minute)
"""
import math

from qcontract import derive_rng, frame_bound_numeric, observable_family

for tier in ("complete", "tier2", "tier3"):
    fam = observable_family(tier)
    res = frame_bound_numeric(fam, restarts=200, rng=derive_rng(0))
    print(f"{tier:9s} k={len(fam):2d}  C = {res.C_estimate:.5f}  (se {res.standard_error:.1e})")
    top = sorted(zip(res.labels, res.witness_coefficients), key=lambda t: -abs(t[1]))[:4]
    print("          largest witness weights:", [(l, round(float(c), 3)) for l, c in top])

print("closed forms: sqrt(3) =", round(math.sqrt(3), 5), " 2+sqrt(3) =", round(2 + math.sqrt(3), 5))
