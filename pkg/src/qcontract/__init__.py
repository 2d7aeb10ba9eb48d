"""Behavioral fingerprints and observable contracts for small quantum kernel channels."""
__version__ = "0.1.0"

from .budget import (
    BudgetParams,
    NonPositiveMargin,
    ReferenceMode,
    ToleranceInterval,
    calibrate_tolerance,
    compose_tolerances,
    detection_margin,
    shot_budget,
)
from .channels import ChannelKind, DriftParams, Tier, kernel_circuit, observable_family, zz_feature_map
from .contract import (
    AuditEntry,
    Fingerprint,
    StageSpec,
    Verdict,
    VerdictReport,
    compute_fingerprint,
    contract_deviation,
    contract_verdict,
    run_verifier,
    verify_audit_chain,
)
from .framebound import (
    FrameBoundResult,
    diamond_distance_unitary,
    frame_bound_analytic_local,
    frame_bound_numeric,
    hermitian_opnorm,
)
from .simcore import (
    IDEAL,
    Circuit,
    Counts,
    Gate,
    NoiseModel,
    PauliObservable,
    Statevector,
    derive_rng,
    expectation_from_counts,
    pauli_expectation_exact,
    run_circuit,
    sample_counts,
)
