"""The round-by-round verifier with its hash-chained audit trail.

Run: python demos/04_streaming_verifier.py
"""
import dataclasses

from qcontract import (
    StageSpec, compute_fingerprint, derive_rng, kernel_circuit, observable_family, run_verifier,
    verify_audit_chain,
)
from qcontract.channels import REFERENCE_PAIR
from qcontract.simcore import NoiseModel

family = observable_family("complete")
spec = StageSpec(tuple(family), 0.15, {"kind": "honest", "pair": [list(x) for x in REFERENCE_PAIR]})
reference = compute_fingerprint(kernel_circuit("honest", *REFERENCE_PAIR), family)

for kind in ("honest", "sneaky"):
    rep = run_verifier(spec, reference, kernel_circuit(kind, *REFERENCE_PAIR), rounds=25,
                       shots_per_round=2280, noise=NoiseModel(), rng=derive_rng(0, 4))
    print(f"{kind}: {rep.verdict.value} after {len(rep.trail)} rounds")
    for e in rep.trail[-3:]:
        print(f"   round {e.round:2d} {e.observable}  mu={e.mu_hat:+.4f}  dev={e.deviation:.4f}"
              f"  {e.decision.value}  {e.entry_hash[:12]}")

trail = list(rep.trail)
print("\nchain intact:", verify_audit_chain(trail, spec.spec_hash))
trail[0] = dataclasses.replace(trail[0], mu_hat=trail[0].mu_hat + 0.001)
print("after editing round 1:", verify_audit_chain(trail, spec.spec_hash))
