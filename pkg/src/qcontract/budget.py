"""Shot budgets, detection margin, and tolerance calibration.

Logs are natural. Budgets are rounded up, and so is the per-observable share.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .contract import Fingerprint


class NonPositiveMargin(ValueError):
    """delta / C does not exceed the tolerance, so no finite budget guarantees detection."""


class ReferenceMode(str, enum.Enum):
    PRECOMPUTED = "precomputed"
    SAMPLED = "sampled"


# Hoeffding constant: 2 B^2 with an exact reference, 8 B^2 when the reference is sampled too
_MODE_FACTOR = {ReferenceMode.PRECOMPUTED: 2.0, ReferenceMode.SAMPLED: 8.0}


@dataclass(frozen=True)
class BudgetParams:
    delta: float
    epsilon: float
    C: float
    k: int
    B: float = 1.0
    eta: float = 0.05
    mode: ReferenceMode = ReferenceMode.PRECOMPUTED

    def __post_init__(self):
        object.__setattr__(self, "mode", ReferenceMode(self.mode))
        if self.delta <= 0 or self.C <= 0 or self.B <= 0 or self.epsilon <= 0:
            raise ValueError("delta, epsilon, C and B must be positive")
        if self.k < 1:
            raise ValueError("family size k must be >= 1")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")


def detection_margin(delta: float, C: float, epsilon: float) -> float:
    """gamma = delta / C - epsilon; raises NonPositiveMargin when gamma <= 0."""
    if delta <= 0 or C <= 0:
        raise ValueError("delta and C must be positive")
    gamma = delta / C - epsilon
    if gamma <= 0:
        raise NonPositiveMargin(
            f"delta/C = {delta / C:.4f} does not exceed epsilon = {epsilon}; "
            "tighten epsilon or relax delta"
        )
    return gamma


def raw_shot_budget(params: BudgetParams) -> float:
    """The unrounded budget ``factor * B^2 k ln(2k/eta) / gamma^2``."""
    gamma = detection_margin(params.delta, params.C, params.epsilon)
    k = params.k
    return _MODE_FACTOR[params.mode] * params.B ** 2 * k * math.log(2 * k / params.eta) / gamma ** 2


def shot_budget(params: BudgetParams) -> int:
    return math.ceil(raw_shot_budget(params))


def per_observable_shots(total: int, k: int) -> int:
    return math.ceil(total / k)


@dataclass(frozen=True)
class ToleranceInterval:
    d_typ: float
    upper: float

    @property
    def empty(self) -> bool:
        return self.d_typ > self.upper

    @property
    def recommended(self) -> float | None:
        return None if self.empty else (self.d_typ + self.upper) / 2

    def remediation(self) -> str | None:
        if not self.empty:
            return None
        return (
            f"typical drift {self.d_typ:.4f} exceeds detection bound {self.upper:.4f}: "
            "use lower-drift hardware, accept a larger minimum separation, "
            "or change the observable family to lower C"
        )

    def to_dict(self) -> dict:
        return {"d_typ": self.d_typ, "upper": self.upper, "empty": self.empty,
                "recommended": self.recommended, "remediation": self.remediation()}


def pairwise_max_deviations(timepoints: Sequence[Fingerprint]) -> dict[tuple[int, int], float]:
    """max_O |Fp_i[O] - Fp_j[O]| for every pair i < j."""
    if len(timepoints) < 2:
        raise ValueError("need at least two timepoints")
    labels = timepoints[0].labels
    for fp in timepoints[1:]:
        if fp.labels != labels:
            raise ValueError("timepoint fingerprints use different families")
    out = {}
    for (i, a), (j, b) in itertools.combinations(enumerate(timepoints), 2):
        out[(i, j)] = max(abs(x - y) for x, y in zip(a.values, b.values))
    return out


def calibrate_tolerance(timepoints: Sequence[Fingerprint], delta_min: float,
                        C: float) -> ToleranceInterval:
    d_typ = max(pairwise_max_deviations(timepoints).values())
    return ToleranceInterval(d_typ, delta_min / C)


def compose_tolerances(stage_tolerances: Sequence[float]) -> float:
    """End-to-end tolerance of sequential stages: the sum of per-stage tolerances."""
    if any(e < 0 for e in stage_tolerances):
        raise ValueError("tolerances must be non-negative")
    return math.fsum(stage_tolerances)
