"""Declared and adversarial kernel channels on two qubits.

The honest channel is the inversion-test kernel circuit: the ZZ feature map for
``x_i`` followed by the adjoint feature map for ``x_j``, so the output state is
``U(x_j)^dag U(x_i)|00>`` and ``|<00|psi>|^2`` is the kernel value
``|<phi(x_j)|phi(x_i)>|^2``. Substituted variants append local gates just
before measurement.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .simcore import CX, RX, RZ, Circuit, Gate, H, NoiseModel, P, PauliObservable, S

FeatureVector = tuple[float, float]

#: The fixed input pair used by every experiment.
REFERENCE_PAIR: tuple[FeatureVector, FeatureVector] = ((0.4, 1.2), (1.1, 0.3))

N_QUBITS = 2
WEAK_ROTATION = math.pi / 6


def as_features(x: Sequence[float]) -> FeatureVector:
    if len(x) != 2:
        raise ValueError(f"feature vectors have exactly two components, got {len(x)}")
    return (float(x[0]), float(x[1]))


class ChannelKind(str, enum.Enum):
    HONEST = "honest"
    SNEAKY = "sneaky"
    WEAK_SNEAKY = "weak-sneaky"
    DRIFTED = "drift"


@dataclass(frozen=True)
class DriftParams:
    """Per-qubit coherent over-rotations: RZ(beta_q) then RX(alpha_q) on qubit q."""

    alpha: tuple[float, ...] = (0.0, 0.0)
    beta: tuple[float, ...] = (0.0, 0.0)
    depolarize: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.alpha) != N_QUBITS or len(self.beta) != N_QUBITS:
            raise ValueError("drift angles are given per qubit")
        if any(abs(v) > math.pi for v in self.alpha + self.beta):
            raise ValueError("drift angles are capped at pi in magnitude")
        if self.depolarize is not None and not 0.0 <= self.depolarize <= 1.0:
            raise ValueError("depolarize override must be in [0, 1]")

    def scaled(self, s: float) -> "DriftParams":
        return replace(self, alpha=tuple(s * a for a in self.alpha),
                       beta=tuple(s * b for b in self.beta))

    @property
    def max_angle(self) -> float:
        return max(abs(v) for v in self.alpha + self.beta)

    def noise(self, base: NoiseModel) -> NoiseModel:
        if self.depolarize is None:
            return base
        return replace(base, depolarize=self.depolarize)


def zz_feature_map(x: Sequence[float], reps: int = 2) -> Circuit:
    """Two-qubit ZZ feature map: per rep, H layer, P(2 x_q), CX-P-CX entangler."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    x0, x1 = as_features(x)
    pair_phase = 2.0 * (math.pi - x0) * (math.pi - x1)
    layer = (
        H(0), H(1),
        P(2.0 * x0, 0), P(2.0 * x1, 1),
        CX(0, 1), P(pair_phase, 1), CX(0, 1),
    )
    return Circuit(N_QUBITS, layer * reps)


def _channel_suffix(kind: ChannelKind, drift: DriftParams | None) -> tuple[Gate, ...]:
    if kind is ChannelKind.HONEST:
        return ()
    if kind is ChannelKind.SNEAKY:
        return tuple(S(q) for q in range(N_QUBITS))
    if kind is ChannelKind.WEAK_SNEAKY:
        return tuple(RZ(WEAK_ROTATION, q) for q in range(N_QUBITS))
    if drift is None:
        raise ValueError("a drifted channel needs DriftParams")
    gates: list[Gate] = []
    for q in range(N_QUBITS):
        # zero angles are skipped so a null drift is gate-for-gate the honest circuit
        if drift.beta[q]:
            gates.append(RZ(drift.beta[q], q))
        if drift.alpha[q]:
            gates.append(RX(drift.alpha[q], q))
    return tuple(gates)


def kernel_circuit(kind: ChannelKind | str, x_i: Sequence[float], x_j: Sequence[float],
                   drift: DriftParams | None = None, reps: int = 2) -> Circuit:
    """Kernel circuit for ``(x_i, x_j)`` under the given channel kind."""
    kind = ChannelKind(kind)
    base = zz_feature_map(x_i, reps).compose(zz_feature_map(x_j, reps).inverse())
    return base.append(*_channel_suffix(kind, drift))


def reference_circuit(kind: ChannelKind | str = ChannelKind.HONEST,
                      drift: DriftParams | None = None) -> Circuit:
    return kernel_circuit(kind, *REFERENCE_PAIR, drift=drift)


class Tier(str, enum.Enum):
    WEAK = "weak"
    COMPLETE = "complete"
    TIER2 = "tier2"
    TIER3 = "tier3"


_LOCAL = ("X1", "Y1", "Z1", "X2", "Y2", "Z2")


def observable_family(tier: Tier | str) -> list[PauliObservable]:
    """Canonical families: locals first (X1..Z2), then correlations lexicographically."""
    tier = Tier(tier)
    if tier is Tier.WEAK:
        labels: tuple[str, ...] = ("Z1Z2",)
    elif tier is Tier.COMPLETE:
        labels = _LOCAL
    elif tier is Tier.TIER2:
        labels = _LOCAL + ("X1X2", "Y1Y2", "Z1Z2")
    else:
        labels = _LOCAL + tuple(f"{a}1{b}2" for a in "XYZ" for b in "XYZ")
    return [PauliObservable.from_label(lbl, N_QUBITS) for lbl in labels]
