"""Desk-scale reproductions of the detection, sample-budget, and drift experiments.

All randomness flows from ``ExperimentConfig.seed`` through :func:`derive_rng`,
so a config fully determines every number in the resulting artifact.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import __version__
from .budget import (
    BudgetParams,
    ReferenceMode,
    calibrate_tolerance,
    pairwise_max_deviations,
    per_observable_shots,
    shot_budget,
)
from .channels import (
    REFERENCE_PAIR,
    ChannelKind,
    DriftParams,
    kernel_circuit,
    observable_family,
)
from .contract import (
    Fingerprint,
    StageSpec,
    compute_fingerprint,
    contract_deviation,
    contract_verdict,
    utc_now,
)
from .report import RunArtifact, Table
from .simcore import IDEAL, Counts, NoiseModel, PauliObservable, derive_rng

EXPERIMENTS = ("detection", "sample", "drift")

# fixed drift directions (radians per unit scale); the harness only rescales them
DRIFT_DIRECTION_A = DriftParams(alpha=(0.8, -0.5), beta=(0.3, 0.6))
DRIFT_DIRECTION_B = DriftParams(alpha=(-0.4, 0.7), beta=(0.9, -0.2))


class ConfigError(ValueError):
    pass


class DriftTargetUnreachable(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "detection"
    x_i: tuple[float, float] = REFERENCE_PAIR[0]
    x_j: tuple[float, float] = REFERENCE_PAIR[1]
    reps: int = 2
    families: tuple[str, ...] = ("weak", "complete")
    channel: str | None = None
    shots: int = 2280
    exact: bool = False
    trials: int = 20
    noise_lambda: float = 0.02
    noise_readout: float = 0.01
    seed: int = 0
    epsilon: float = 0.15
    delta: float = 0.5
    eta: float = 0.05
    C: float = math.sqrt(3.0)
    reference_shots: int | None = 100_000
    budget_divisors: tuple[int, ...] = (1, 10, 100)
    drift_targets: tuple[float, float, float] = (0.067, 0.067, 0.046)
    out: str | None = None

    def __post_init__(self):
        self.x_i = tuple(float(v) for v in self.x_i)
        self.x_j = tuple(float(v) for v in self.x_j)
        self.families = tuple(self.families)
        self.budget_divisors = tuple(int(d) for d in self.budget_divisors)
        self.drift_targets = tuple(float(t) for t in self.drift_targets)

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.seed is None:
            raise ConfigError("a seed is required")
        try:
            for tier in self.families:
                observable_family(tier)
            if self.channel is not None:
                ChannelKind(self.channel)
            self.noise()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.families:
            raise ConfigError("at least one observable family is required")
        if not self.exact and self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.experiment == "sample":
            if self.trials < 20:
                raise ConfigError("the sample experiment needs at least 20 trials")
            if any(d < 1 for d in self.budget_divisors):
                raise ConfigError("budget divisors must be positive")
            if min(self.shots // d for d in self.budget_divisors) < 1:
                raise ConfigError("a budget falls below one shot per observable")
        if self.experiment == "drift":
            if len(self.drift_targets) != 3:
                raise ConfigError("drift needs three pairwise targets (t1-t2, t1-t3, t2-t3)")
            if any(t < 0 for t in self.drift_targets):
                raise ConfigError("drift targets must be non-negative")
        return self

    def noise(self) -> NoiseModel:
        return NoiseModel(self.noise_lambda, self.noise_readout)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _metadata(cfg: ExperimentConfig, specs: Mapping[str, StageSpec]) -> dict:
    return {"tool": "qcontract", "version": __version__, "backend": "simulator",
            "created_utc": utc_now(), "config": cfg.to_dict(),
            "spec_hashes": {k: s.spec_hash for k, s in specs.items()}}


def _channel_descriptor(cfg: ExperimentConfig, kind: str = "honest") -> dict:
    return {"kind": kind, "feature_map": "zz", "reps": cfg.reps,
            "x_i": list(cfg.x_i), "x_j": list(cfg.x_j)}


def _union_family(tiers: Sequence[str]) -> list[PauliObservable]:
    out: list[PauliObservable] = []
    for tier in tiers:
        for obs in observable_family(tier):
            if obs not in out:
                out.append(obs)
    return out


def _restrict(fp: Fingerprint, family: Sequence[PauliObservable], **prov) -> Fingerprint:
    labels = tuple(o.label for o in family)
    return Fingerprint(labels, tuple(fp[lbl] for lbl in labels), fp.shots,
                       {**fp.provenance, **prov})


def _counts_doc(counts: Mapping[str, Counts]) -> dict:
    return {lbl: dict(c.tallies) for lbl, c in counts.items()}


def experiment_detection(cfg: ExperimentConfig) -> RunArtifact:
    """Honest vs sneaky fingerprints, scored against every configured contract."""
    cfg.validate()
    noise = cfg.noise()
    union = _union_family(cfg.families)
    adversary = cfg.channel or ChannelKind.SNEAKY.value
    specs = {tier: StageSpec(tuple(observable_family(tier)), cfg.epsilon,
                             _channel_descriptor(cfg))
             for tier in cfg.families}
    art = RunArtifact("detection", {}, specs)

    full: dict[str, Fingerprint] = {}
    for idx, kind in enumerate(("honest", adversary)):
        circuit = kernel_circuit(kind, cfg.x_i, cfg.x_j, reps=cfg.reps)
        counts: dict[str, Counts] = {}
        full[kind] = compute_fingerprint(
            circuit, union, None if cfg.exact else cfg.shots, noise,
            derive_rng(cfg.seed, idx), {"channel": kind, "seed": cfg.seed, "stream": idx},
            counts)
        if counts:
            art.counts[kind] = _counts_doc(counts)

    union_dev = contract_deviation(full["honest"], full[adversary])
    for tier, spec in specs.items():
        fa = _restrict(full["honest"], spec.family, contract=tier)
        fb = _restrict(full[adversary], spec.family, contract=tier)
        art.fingerprints[f"honest/{tier}"] = fa
        art.fingerprints[f"{adversary}/{tier}"] = fb
        dev = contract_deviation(fa, fb)
        art.deviations[tier] = dev.to_dict()
        art.verdicts[tier] = contract_verdict(dev, cfg.epsilon).value

    dev_table = Table(["observable", "dev_honest_vs_sneaky", "within_tolerance"])
    for lbl, d in union_dev.per_observable.items():
        dev_table.rows.append([lbl, d, "yes" if d <= cfg.epsilon else "no"])
    verdict_table = Table(["contract", "k", "max_dev", "argmax_observable", "verdict"])
    for tier in cfg.families:
        d = art.deviations[tier]
        verdict_table.rows.append([tier, len(specs[tier].family), d["max_dev"],
                                   d["argmax_label"], art.verdicts[tier]])
    art.tables = {"deviations": dev_table, "verdicts": verdict_table}
    art.metadata = _metadata(cfg, specs)
    return art


def _budget_label(divisor: int) -> str:
    return "N" if divisor == 1 else f"N/{divisor}"


def experiment_sample_complexity(cfg: ExperimentConfig,
                                 progress: Callable[[str], None] | None = None) -> RunArtifact:
    """TPR/FPR of the full-family decision at the base budget and its fractions."""
    cfg.validate()
    noise = cfg.noise()
    tier = cfg.families[-1]
    family = observable_family(tier)
    adversary = cfg.channel or ChannelKind.WEAK_SNEAKY.value
    spec = StageSpec(tuple(family), cfg.epsilon, _channel_descriptor(cfg))
    honest = kernel_circuit("honest", cfg.x_i, cfg.x_j, reps=cfg.reps)
    sneaky = kernel_circuit(adversary, cfg.x_i, cfg.x_j, reps=cfg.reps)

    reference = compute_fingerprint(
        honest, family, cfg.reference_shots, IDEAL, derive_rng(cfg.seed, 0),
        {"channel": "honest", "role": "reference", "noise": "ideal", "contract": tier})
    exact_ref = compute_fingerprint(honest, family)
    true_dev = contract_deviation(exact_ref, compute_fingerprint(sneaky, family))

    params = BudgetParams(cfg.delta, cfg.epsilon, cfg.C, len(family), eta=cfg.eta,
                          mode=ReferenceMode.SAMPLED)
    total = shot_budget(params)

    rates = Table(["budget", "n_O", "TPR", "FPR"])
    trial_log: dict[str, dict[str, list[float]]] = {}
    for b_idx, divisor in enumerate(cfg.budget_divisors):
        n_o = cfg.shots // divisor
        max_devs: dict[str, list[float]] = {"sneaky": [], "honest": []}
        # every trial owns its stream, so the loop order cannot change any result
        for t in range(cfg.trials):
            for c_idx, (role, circuit) in enumerate((("sneaky", sneaky), ("honest", honest))):
                fp = compute_fingerprint(circuit, family, n_o, noise,
                                         derive_rng(cfg.seed, 1, b_idx, t, c_idx))
                max_devs[role].append(contract_deviation(reference, fp).max_dev)
        tpr = float(np.mean(np.array(max_devs["sneaky"]) > cfg.epsilon))
        fpr = float(np.mean(np.array(max_devs["honest"]) > cfg.epsilon))
        label = _budget_label(divisor)
        rates.rows.append([label, n_o, tpr, fpr])
        trial_log[label] = max_devs
        if progress:
            progress(f"{label}: n_O={n_o} TPR={tpr:.2f} FPR={fpr:.2f}")

    art = RunArtifact("sample", _metadata(cfg, {tier: spec}), {tier: spec})
    art.fingerprints["reference"] = reference
    art.deviations["true_adversary_deviation"] = true_dev.to_dict()
    art.tables = {"rates": rates}
    art.extra = {"sampled_budget_N": total, "base_n_O": cfg.shots,
                 "per_observable_from_budget": per_observable_shots(total, len(family)),
                 "trial_max_deviations": trial_log, "adversary": adversary}
    return art


def _exact_fp(cfg: ExperimentConfig, family, drift: DriftParams | None) -> Fingerprint:
    kind = "honest" if drift is None else "drift"
    return compute_fingerprint(kernel_circuit(kind, cfg.x_i, cfg.x_j, drift=drift,
                                              reps=cfg.reps), family)


def _max_dev(a: Fingerprint, b: Fingerprint) -> float:
    return contract_deviation(a, b).max_dev


def _bisect(fn: Callable[[float], float], target: float, lo: float, hi: float,
            tol: float = 1e-10, max_iter: int = 200) -> float:
    """Root of fn(x) = target on [lo, hi], assuming a sign change across the bracket."""
    f_lo = fn(lo) - target
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid) - target
        if abs(f_mid) < tol:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_drift_scale(cfg: ExperimentConfig, family, base: Fingerprint,
                      direction: DriftParams, target: float) -> DriftParams:
    """Scale ``direction`` so the exact max deviation from ``base`` equals ``target``."""
    if target == 0.0:
        return direction.scaled(0.0)
    cap = math.pi / direction.max_angle

    def achieved(s: float) -> float:
        return _max_dev(base, _exact_fp(cfg, family, direction.scaled(s)))

    hi = min(0.05, cap)
    while achieved(hi) < target:
        if hi >= cap:
            raise DriftTargetUnreachable(
                f"drift target {target} not reached before the pi angle cap")
        hi = min(2 * hi, cap)
    return direction.scaled(_bisect(achieved, target, 0.0, hi))


def _blend(a: DriftParams, b: DriftParams, phi: float) -> DriftParams:
    c, s = math.cos(phi), math.sin(phi)
    alpha = tuple(c * x + s * y for x, y in zip(a.alpha, b.alpha))
    beta = tuple(c * x + s * y for x, y in zip(a.beta, b.beta))
    norm = math.hypot(*alpha, *beta)
    return DriftParams(tuple(x / norm for x in alpha), tuple(x / norm for x in beta))


def synthesize_timepoints(cfg: ExperimentConfig, family,
                          grid: int = 64) -> list[DriftParams | None]:
    """Drift settings for t1 (no drift), t2, t3 hitting the three pairwise targets.

    t2 scales direction A to reach d(t1, t2). t3 follows a direction blended from
    A toward B by angle phi; its scale is solved for d(t1, t3) and phi is bisected
    until d(t2, t3) hits its target.
    """
    d12, d13, d23 = cfg.drift_targets
    base = _exact_fp(cfg, family, None)
    t2 = solve_drift_scale(cfg, family, base, DRIFT_DIRECTION_A, d12)
    fp2 = _exact_fp(cfg, family, t2)

    def t3_for(phi: float) -> DriftParams:
        return solve_drift_scale(cfg, family, base, _blend(DRIFT_DIRECTION_A,
                                                           DRIFT_DIRECTION_B, phi), d13)

    def d23_for(phi: float) -> float:
        return _max_dev(fp2, _exact_fp(cfg, family, t3_for(phi)))

    phis = np.linspace(0.0, math.pi, grid + 1)
    prev_phi, prev_gap = phis[0], d23_for(phis[0]) - d23
    if abs(prev_gap) < 1e-10:
        return [None, t2, t3_for(prev_phi)]
    for phi in phis[1:]:
        gap = d23_for(phi) - d23
        if (gap < 0) != (prev_gap < 0):
            return [None, t2, t3_for(_bisect(d23_for, d23, prev_phi, phi))]
        prev_phi, prev_gap = phi, gap
    raise DriftTargetUnreachable(f"pairwise drift target {d23} for (t2, t3) not reachable")


def experiment_drift(cfg: ExperimentConfig) -> RunArtifact:
    """Three synthetic timepoints of the honest channel, then tolerance calibration."""
    cfg.validate()
    tier = cfg.families[-1]
    family = observable_family(tier)
    spec = StageSpec(tuple(family), cfg.epsilon, _channel_descriptor(cfg))
    settings = synthesize_timepoints(cfg, family)

    art = RunArtifact("drift", _metadata(cfg, {tier: spec}), {tier: spec})
    fps = []
    for idx, drift in enumerate(settings):
        kind = "honest" if drift is None else "drift"
        circuit = kernel_circuit(kind, cfg.x_i, cfg.x_j, drift=drift, reps=cfg.reps)
        noise = cfg.noise() if drift is None else drift.noise(cfg.noise())
        counts: dict[str, Counts] = {}
        fp = compute_fingerprint(circuit, family, None if cfg.exact else cfg.shots, noise,
                                 derive_rng(cfg.seed, idx),
                                 {"timepoint": f"t{idx + 1}", "contract": tier,
                                  "seed": cfg.seed, "stream": idx}, counts)
        fps.append(fp)
        art.fingerprints[f"t{idx + 1}"] = fp
        if counts:
            art.counts[f"t{idx + 1}"] = _counts_doc(counts)

    pairs = pairwise_max_deviations(fps)
    interval = calibrate_tolerance(fps, cfg.delta, cfg.C)
    table = Table(["quantity", "value"])
    for (i, j), v in pairs.items():
        table.rows.append([f"max_O |Fp(t{i + 1})[O] - Fp(t{j + 1})[O]|", v])
    table.rows += [
        ["d_drift_typ", interval.d_typ],
        ["tolerance_interval", f"[{interval.d_typ:.3f}, {interval.upper:.3f}]"],
        ["interval_non_empty", "no" if interval.empty else "yes"],
        ["recommended_epsilon_A",
         "" if interval.recommended is None else interval.recommended],
    ]
    art.tables = {"drift": table}
    art.deviations = {f"t{i + 1}-t{j + 1}": v for (i, j), v in pairs.items()}
    art.extra = {
        "interval": interval.to_dict(),
        "drift_params": [None if d is None else {"alpha": list(d.alpha), "beta": list(d.beta)}
                         for d in settings],
        "targets": list(cfg.drift_targets),
    }
    if interval.empty:
        art.extra["remediation"] = interval.remediation()
    return art


RUNNERS: dict[str, Callable[[ExperimentConfig], RunArtifact]] = {
    "detection": experiment_detection,
    "sample": experiment_sample_complexity,
    "drift": experiment_drift,
}


def run_experiment(cfg: ExperimentConfig) -> RunArtifact:
    return RUNNERS[cfg.validate().experiment](cfg)
