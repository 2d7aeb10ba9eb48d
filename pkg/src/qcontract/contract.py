"""Observable contracts: stage specs, fingerprints, deviation, and the verifier."""
from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .simcore import (
    IDEAL,
    Circuit,
    NoiseModel,
    PauliObservable,
    basis_change_gates,
    expectation_from_counts,
    pauli_expectation_exact,
    run_circuit,
    sample_counts,
)

EXACT = "exact"


def canonical_real(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def canonical_json(obj: Any) -> str:
    """Sorted-key JSON with reals rendered by :func:`canonical_real`."""

    def conv(o):
        if isinstance(o, bool) or o is None or isinstance(o, str):
            return o
        if isinstance(o, (int, np.integer)):
            return int(o)
        if isinstance(o, (float, np.floating)):
            return {"__real__": canonical_real(o)}
        if isinstance(o, Mapping):
            return {str(k): conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        raise TypeError(f"cannot canonicalize {type(o).__name__}")

    return json.dumps(conv(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def spec_hash(family: Sequence[PauliObservable | str], epsilon: float,
              channel: Mapping[str, Any] | str) -> str:
    """SHA-256 over the canonical form of (family labels, tolerance, channel)."""
    labels = [o if isinstance(o, str) else o.label for o in family]
    if not labels:
        raise ValueError("observable family must be non-empty")
    return sha256_hex(canonical_json(
        {"family": labels, "epsilon_A": float(epsilon), "channel": channel}
    ))


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


@dataclass(frozen=True)
class StageSpec:
    family: tuple[PauliObservable, ...]
    epsilon: float
    channel: Mapping[str, Any] | str
    timestamp: str = field(default_factory=utc_now)
    spec_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", tuple(self.family))
        if not self.family:
            raise ValueError("observable family must be non-empty")
        if not 0.0 < self.epsilon <= 2.0:
            raise ValueError(f"epsilon_A must be in (0, 2], got {self.epsilon}")
        expected = spec_hash(self.family, self.epsilon, self.channel)
        if self.spec_hash and self.spec_hash != expected:
            raise ValueError("spec_hash does not match the spec contents")
        object.__setattr__(self, "spec_hash", expected)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.family)

    def to_dict(self) -> dict:
        return {"spec_hash": self.spec_hash, "family": list(self.labels),
                "epsilon_A": self.epsilon, "channel": self.channel,
                "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], n_qubits: int = 2) -> "StageSpec":
        family = tuple(PauliObservable.from_label(lbl, n_qubits) for lbl in d["family"])
        return cls(family, float(d["epsilon_A"]), d["channel"], d["timestamp"],
                   d.get("spec_hash", ""))


@dataclass(frozen=True)
class Fingerprint:
    labels: tuple[str, ...]
    values: tuple[float, ...]
    shots: int | str = EXACT
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.labels) != len(self.values):
            raise ValueError("labels and values differ in length")
        if not self.labels:
            raise ValueError("empty fingerprint")
        if any(not -1.0 <= v <= 1.0 for v in self.values):
            raise ValueError("expectations must lie in [-1, 1]")
        if self.shots != EXACT and (not isinstance(self.shots, int) or self.shots < 1):
            raise ValueError(f"shots must be a positive int or {EXACT!r}")

    def __getitem__(self, label: str) -> float:
        return self.values[self.labels.index(label)]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def to_dict(self) -> dict:
        return {"entries": dict(zip(self.labels, self.values)), "order": list(self.labels),
                "shots_per_observable": self.shots, "provenance": dict(self.provenance)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Fingerprint":
        order = d.get("order") or list(d["entries"])
        return cls(tuple(order), tuple(d["entries"][k] for k in order),
                   d.get("shots_per_observable", EXACT), d.get("provenance", {}))

    def check_family(self, family: Iterable[PauliObservable | str]) -> None:
        labels = tuple(o if isinstance(o, str) else o.label for o in family)
        if labels != self.labels:
            raise ValueError(f"fingerprint labels {self.labels} do not match family {labels}")


def compute_fingerprint(circuit: Circuit, family: Sequence[PauliObservable],
                        shots: int | None = None, noise: NoiseModel = IDEAL,
                        rng: np.random.Generator | None = None,
                        provenance: Mapping[str, Any] | None = None,
                        counts_out: dict | None = None) -> Fingerprint:
    """Exact fingerprint when ``shots`` is None, else one sampled estimate per observable.

    In shot mode each observable gets its own measurement circuit (base plus basis
    change) and ``shots`` fresh samples. Raw counts are stored in ``counts_out``
    (label -> Counts) when given.
    """
    if not family:
        raise ValueError("observable family must be non-empty")
    for obs in family:
        if obs.n_qubits != circuit.n_qubits:
            raise ValueError(f"observable {obs.label} does not match circuit width")
    state = run_circuit(circuit)
    values = []
    if shots is None:
        values = [pauli_expectation_exact(state, obs) for obs in family]
    else:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        if rng is None:
            rng = np.random.default_rng()
        for obs in family:
            # running the rotations on the base output equals running measurement_circuit
            rotated = run_circuit(Circuit(circuit.n_qubits, basis_change_gates(obs)), state)
            counts = sample_counts(rotated, shots, noise, rng)
            if counts_out is not None:
                counts_out[obs.label] = counts
            values.append(expectation_from_counts(counts, obs))
    return Fingerprint(tuple(o.label for o in family), tuple(values),
                       EXACT if shots is None else int(shots), dict(provenance or {}))


@dataclass(frozen=True)
class Deviation:
    per_observable: Mapping[str, float]
    max_dev: float
    argmax_label: str

    def exceeds(self, epsilon: float) -> list[str]:
        return [k for k, v in self.per_observable.items() if v > epsilon]

    def to_dict(self) -> dict:
        return {"per_observable": dict(self.per_observable), "max_dev": self.max_dev,
                "argmax_label": self.argmax_label}


def contract_deviation(fp_a: Fingerprint, fp_b: Fingerprint) -> Deviation:
    """Per-observable |difference| and its maximum (the L-infinity distance)."""
    if fp_a.labels != fp_b.labels:
        raise ValueError(f"family mismatch: {fp_a.labels} vs {fp_b.labels}")
    per = {lbl: abs(b - a) for lbl, a, b in zip(fp_a.labels, fp_a.values, fp_b.values)}
    argmax = max(per, key=per.get)
    return Deviation(per, per[argmax], argmax)


class Verdict(str, enum.Enum):
    ACCEPT = "accept"
    HALT = "halt"


class Decision(str, enum.Enum):
    DRIFT_LOGGED = "drift-logged"
    HALT = "halt"


def contract_verdict(deviation: Deviation, epsilon: float) -> Verdict:
    """Full-family rule: accept iff the maximum deviation is at most ``epsilon``."""
    return Verdict.HALT if deviation.max_dev > epsilon else Verdict.ACCEPT


@dataclass(frozen=True)
class AuditEntry:
    round: int
    observable: str
    mu_hat: float
    deviation: float
    decision: Decision
    prev_hash: str
    entry_hash: str = ""

    def payload(self) -> dict:
        return {"round": self.round, "observable": self.observable,
                "mu_hat": float(self.mu_hat), "deviation": float(self.deviation),
                "decision": Decision(self.decision).value, "prev_hash": self.prev_hash}

    def compute_hash(self) -> str:
        return sha256_hex(canonical_json(self.payload()))

    @classmethod
    def create(cls, round: int, observable: str, mu_hat: float, deviation: float,
               decision: Decision, prev_hash: str) -> "AuditEntry":
        entry = cls(round, observable, float(mu_hat), float(deviation), Decision(decision),
                    prev_hash)
        return cls(**{**entry.__dict__, "entry_hash": entry.compute_hash()})

    def to_dict(self) -> dict:
        return {**self.payload(), "entry_hash": self.entry_hash}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AuditEntry":
        return cls(int(d["round"]), d["observable"], float(d["mu_hat"]),
                   float(d["deviation"]), Decision(d["decision"]), d["prev_hash"],
                   d["entry_hash"])


def verify_audit_chain(trail: Sequence[AuditEntry], anchor: str) -> bool:
    """True iff every entry hash recomputes and links back to ``anchor``."""
    prev = anchor
    for entry in trail:
        if entry.prev_hash != prev or entry.compute_hash() != entry.entry_hash:
            return False
        prev = entry.entry_hash
    return True


@dataclass(frozen=True)
class VerdictReport:
    verdict: Verdict
    halted_round: int | None
    trail: tuple[AuditEntry, ...]
    config: Mapping[str, Any]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "halted_round": self.halted_round,
                "trail": [e.to_dict() for e in self.trail], "config": dict(self.config)}


def run_verifier(spec: StageSpec, reference: Fingerprint, channel: Circuit, rounds: int,
                 shots_per_round: int, noise: NoiseModel = IDEAL,
                 rng: np.random.Generator | None = None) -> VerdictReport:
    """Streaming verifier: one uniformly drawn observable per round.

    A round whose deviation exceeds the tolerance halts the session; every other
    round is committed as a drift event. Exhausting ``rounds`` yields Accept.
    """
    reference.check_family(spec.family)
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if shots_per_round < 1:
        raise ValueError("shots_per_round must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    state = run_circuit(channel)
    family = spec.family
    trail: list[AuditEntry] = []
    prev = spec.spec_hash
    verdict, halted = Verdict.ACCEPT, None
    for t in range(1, rounds + 1):
        obs = family[int(rng.integers(len(family)))]
        rotated = run_circuit(Circuit(channel.n_qubits, basis_change_gates(obs)), state)
        mu_hat = expectation_from_counts(sample_counts(rotated, shots_per_round, noise, rng), obs)
        dev = abs(mu_hat - reference[obs.label])
        decision = Decision.HALT if dev > spec.epsilon else Decision.DRIFT_LOGGED
        entry = AuditEntry.create(t, obs.label, mu_hat, dev, decision, prev)
        trail.append(entry)
        prev = entry.entry_hash
        if decision is Decision.HALT:
            verdict, halted = Verdict.HALT, t
            break
    config = {"spec_hash": spec.spec_hash, "epsilon_A": spec.epsilon, "rounds": rounds,
              "shots_per_round": shots_per_round,
              "noise": {"depolarize": noise.depolarize, "readout_flip": noise.readout_flip},
              "reference_shots": reference.shots}
    return VerdictReport(verdict, halted, tuple(trail), config)


def detection_probability_lower_bound(hit_fraction: float, rounds: int) -> float:
    """Chance that at least one of ``rounds`` uniform draws lands on a violating observable."""
    return 1.0 - (1.0 - hit_fraction) ** rounds

