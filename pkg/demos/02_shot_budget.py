"""Shot budgets for the local family and what happens when C grows.

Run: python demos/02_shot_budget.py
"""
import math

from qcontract import BudgetParams, NonPositiveMargin, detection_margin, shot_budget
from qcontract.budget import per_observable_shots

C = math.sqrt(3)
for mode in ("precomputed", "sampled"):
    n = shot_budget(BudgetParams(0.5, 0.15, C, 6, mode=mode))
    print(f"{mode:12s} N = {n:6d}   n_O = {per_observable_shots(n, 6)}")

print("\nmargin gamma =", round(detection_margin(0.5, C, 0.15), 4))

# the full two-qubit Pauli family has C = 2 + sqrt(3) and no margin left at eps = 0.15
try:
    detection_margin(0.5, 2 + math.sqrt(3), 0.15)
except NonPositiveMargin as exc:
    print("tier3 at eps=0.15:", exc)

n = shot_budget(BudgetParams(0.5, 0.05, 3.73, 15, mode="sampled"))
print("tier3 at eps=0.05, sampled reference: N =", n)
