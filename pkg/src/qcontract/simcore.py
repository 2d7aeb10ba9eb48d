"""Small pure-state simulator (up to 4 qubits).

Conventions used everywhere in the package:

* Qubits are indexed from 0. The statevector is little-endian: amplitude
  index ``b`` has bit ``q`` equal to the value of qubit ``q``. Bitstrings in
  :class:`Counts` are written most-significant first, so qubit 0 is the
  rightmost character (``"10"`` means qubit 1 is set).
* Observable labels are 1-based wires: ``"X1"`` is X on qubit 0 (``X (x) I``
  in wire order), ``"Z1Z2"`` is Z on both qubits.
* ``S = diag(1, i)``, ``P(t) = diag(1, e^{it})``,
  ``RZ(t) = diag(e^{-it/2}, e^{it/2})``, ``RX(t) = exp(-itX/2)``.

Noise never acts mid-circuit; it is applied to the measured distribution by
:func:`sample_counts`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

MAX_QUBITS = 4

_SQ2 = 1.0 / math.sqrt(2.0)

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_FIXED_1Q = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": PAULI_1Q["X"],
    "Y": PAULI_1Q["Y"],
    "Z": PAULI_1Q["Z"],
}

# two-qubit matrices in the (targets[0], targets[1]) basis, index = 2*b0 + b1
_FIXED_2Q = {
    "CX": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}

_ROTATIONS = {"RX", "RY", "RZ", "P"}

GATE_KINDS = frozenset(_FIXED_1Q) | frozenset(_FIXED_2Q) | _ROTATIONS

_INVERSE_KIND = {"S": "Sdg", "Sdg": "S"}


def _rotation_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[complex(c, -s), 0], [0, complex(c, s)]], dtype=complex)
    # phase gate
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One gate application. ``targets`` is ``(control, target)`` for CX/CZ."""

    kind: str
    targets: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        arity = 2 if self.kind in _FIXED_2Q else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.targets}")
        if len(set(self.targets)) != arity:
            raise ValueError(f"repeated target in {self.targets}")
        if any(t < 0 for t in self.targets):
            raise ValueError(f"negative qubit index in {self.targets}")
        if (self.kind in _ROTATIONS) != (self.theta is not None):
            raise ValueError(f"theta is required exactly for rotation gates ({self.kind})")

    @property
    def matrix(self) -> np.ndarray:
        if self.kind in _ROTATIONS:
            return _rotation_matrix(self.kind, float(self.theta))
        if self.kind in _FIXED_2Q:
            return _FIXED_2Q[self.kind]
        return _FIXED_1Q[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in _ROTATIONS:
            return Gate(self.kind, self.targets, -self.theta)
        return Gate(_INVERSE_KIND.get(self.kind, self.kind), self.targets)


# short constructors, mostly for readability of circuit builders
def H(q): return Gate("H", (q,))
def S(q): return Gate("S", (q,))
def Sdg(q): return Gate("Sdg", (q,))
def RX(theta, q): return Gate("RX", (q,), theta)
def RY(theta, q): return Gate("RY", (q,), theta)
def RZ(theta, q): return Gate("RZ", (q,), theta)
def P(theta, q): return Gate("P", (q,), theta)
def CX(control, target): return Gate("CX", (control, target))
def CZ(control, target): return Gate("CZ", (control, target))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Gate, ...] = ()

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        object.__setattr__(self, "ops", tuple(self.ops))
        for g in self.ops:
            if max(g.targets) >= self.n_qubits:
                raise ValueError(f"gate {g} out of range for {self.n_qubits} qubits")

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def append(self, *gates: Gate) -> "Circuit":
        return Circuit(self.n_qubits, self.ops + tuple(gates))

    def compose(self, other: "Circuit") -> "Circuit":
        """``self`` followed by ``other``."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit-count mismatch")
        return Circuit(self.n_qubits, self.ops + other.ops)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.ops)))


def _check_qubit_count(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n}")


@dataclass(frozen=True, eq=False)
class Statevector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size != 1 << n:
            raise ValueError(f"length {amps.size} is not a power of two")
        _check_qubit_count(n)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        _check_qubit_count(n_qubits)
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, bits: str) -> "Statevector":
        """Computational basis state from a bitstring (qubit 0 rightmost)."""
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _apply_matrix(amps: np.ndarray, n: int, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    # C-order reshape puts qubit q on axis n-1-q
    psi = amps.reshape((2,) * n)
    axes = [n - 1 - q for q in targets]
    k = len(targets)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    n = state.n_qubits
    if max(gate.targets) >= n:
        raise ValueError(f"gate {gate} targets a qubit outside a {n}-qubit state")
    return Statevector(_apply_matrix(state.amplitudes, n, gate.matrix, gate.targets))


def run_circuit(circuit: Circuit, init: Statevector | None = None) -> Statevector:
    """Apply ``circuit`` left to right; ``init`` defaults to ``|0...0>``."""
    if init is None:
        init = Statevector.zero(circuit.n_qubits)
    if init.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"circuit has {circuit.n_qubits} qubits but state has {init.n_qubits}"
        )
    amps = init.amplitudes
    n = circuit.n_qubits
    for g in circuit.ops:
        amps = _apply_matrix(amps, n, g.matrix, g.targets)
    return Statevector(amps) if circuit.ops else init


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of ``circuit`` in the little-endian basis."""
    d = 1 << circuit.n_qubits
    cols = [run_circuit(circuit, Statevector(np.eye(d, dtype=complex)[:, j])).amplitudes
            for j in range(d)]
    return np.column_stack(cols)


_LABEL_TOKEN = re.compile(r"([IXYZ])(\d+)")


@dataclass(frozen=True)
class PauliObservable:
    """Pauli string; ``factors[q]`` acts on qubit ``q`` (wire ``q + 1``)."""

    factors: tuple[str, ...]

    def __post_init__(self):
        f = tuple(self.factors)
        object.__setattr__(self, "factors", f)
        _check_qubit_count(len(f))
        if any(p not in "IXYZ" or len(p) != 1 for p in f):
            raise ValueError(f"bad Pauli factors {f}")
        if all(p == "I" for p in f):
            raise ValueError("the identity string is not an observable here")

    @classmethod
    def from_label(cls, label: str, n_qubits: int = 2) -> "PauliObservable":
        tokens = _LABEL_TOKEN.findall(label)
        if not tokens or "".join(p + w for p, w in tokens) != label:
            raise ValueError(f"cannot parse observable label {label!r}")
        factors = ["I"] * n_qubits
        for p, wire in tokens:
            q = int(wire) - 1
            if not 0 <= q < n_qubits:
                raise ValueError(f"wire {wire} out of range in {label!r}")
            if factors[q] != "I":
                raise ValueError(f"wire {wire} repeated in {label!r}")
            factors[q] = p
        return cls(tuple(factors))

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def label(self) -> str:
        return "".join(f"{p}{q + 1}" for q, p in enumerate(self.factors) if p != "I")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, p in enumerate(self.factors) if p != "I")

    def __str__(self):
        return self.label


def pauli_expectation_exact(state: Statevector, obs: PauliObservable) -> float:
    """``<psi|O|psi>`` by applying each factor to a copy of the state."""
    n = state.n_qubits
    if obs.n_qubits != n:
        raise ValueError(f"{obs.n_qubits}-qubit observable on a {n}-qubit state")
    phi = state.amplitudes
    for q in obs.support:
        phi = _apply_matrix(phi, n, PAULI_1Q[obs.factors[q]], (q,))
    value = float(np.real(np.vdot(state.amplitudes, phi)))
    return min(1.0, max(-1.0, value))


def basis_change_gates(obs: PauliObservable) -> tuple[Gate, ...]:
    """Pre-measurement rotations: H before X, Sdg then H before Y."""
    gates: list[Gate] = []
    for q in obs.support:
        p = obs.factors[q]
        if p == "X":
            gates.append(H(q))
        elif p == "Y":
            gates.extend((Sdg(q), H(q)))
    return tuple(gates)


def measurement_circuit(base: Circuit, obs: PauliObservable) -> Circuit:
    if obs.n_qubits != base.n_qubits:
        raise ValueError("observable and circuit disagree on qubit count")
    return base.append(*basis_change_gates(obs))


@dataclass(frozen=True)
class NoiseModel:
    """Measurement-level noise: depolarizing mix, then independent readout flips."""

    depolarize: float = 0.02
    readout_flip: float = 0.01

    def __post_init__(self):
        for name in ("depolarize", "readout_flip"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @property
    def is_ideal(self) -> bool:
        return self.depolarize == 0.0 and self.readout_flip == 0.0


IDEAL = NoiseModel(0.0, 0.0)


@dataclass(frozen=True)
class Counts:
    tallies: Mapping[str, int]
    n_qubits: int

    def __post_init__(self):
        tallies = {}
        for b, t in self.tallies.items():
            if len(b) != self.n_qubits or set(b) - {"0", "1"}:
                raise ValueError(f"bad bitstring {b!r} for {self.n_qubits} qubits")
            if t < 0:
                raise ValueError(f"negative tally for {b!r}")
            if t:
                tallies[b] = int(t)
        object.__setattr__(self, "tallies", dict(sorted(tallies.items())))

    @classmethod
    def from_dict(cls, tallies: Mapping[str, int]) -> "Counts":
        if not tallies:
            raise ValueError("empty counts")
        return cls(tallies, len(next(iter(tallies))))

    @property
    def total_shots(self) -> int:
        return sum(self.tallies.values())

    def __getitem__(self, bits: str) -> int:
        return self.tallies.get(bits, 0)


def measured_distribution(state: Statevector, noise: NoiseModel = IDEAL) -> np.ndarray:
    """Outcome probabilities after the noise model, indexed little-endian.

    Readout flips are folded in exactly (per-qubit 2x2 stochastic maps), which is
    equal in distribution to flipping each sampled bit independently.
    """
    p = state.probabilities
    if noise.is_ideal:
        return p
    n = state.n_qubits
    lam, eps = noise.depolarize, noise.readout_flip
    p = (1.0 - lam) * p + lam / p.size
    if eps > 0.0:
        flip = np.array([[1 - eps, eps], [eps, 1 - eps]])
        for q in range(n):
            p = _apply_matrix(p.astype(complex), n, flip.astype(complex), (q,)).real
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_counts(state: Statevector, shots: int, noise: NoiseModel = IDEAL,
                  rng: np.random.Generator | None = None) -> Counts:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    p = measured_distribution(state, noise)
    draws = rng.multinomial(int(shots), p)
    n = state.n_qubits
    return Counts({format(i, f"0{n}b"): int(t) for i, t in enumerate(draws) if t}, n)


def parity_signs(obs: PauliObservable) -> np.ndarray:
    """(-1)^(parity of the observable's support) for every basis index."""
    idx = np.arange(1 << obs.n_qubits)
    parity = np.zeros_like(idx)
    for q in obs.support:
        parity ^= (idx >> q) & 1
    return 1 - 2 * parity


def expectation_from_counts(counts: Counts, obs: PauliObservable) -> float:
    total = counts.total_shots
    if total < 1:
        raise ValueError("empty counts")
    if counts.n_qubits != obs.n_qubits:
        raise ValueError("counts and observable disagree on qubit count")
    signs = parity_signs(obs)
    acc = sum(signs[int(b, 2)] * t for b, t in counts.tallies.items())
    return acc / total


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream for ``(master_seed, *keys)``; keys are hashed by SeedSequence."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))
