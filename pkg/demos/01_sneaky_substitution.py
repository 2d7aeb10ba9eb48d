"""Why a single correlator cannot see the S-gate substitution, and six local Paulis can.

Run: python demos/01_sneaky_substitution.py
"""
from qcontract import (
    compute_fingerprint, contract_deviation, contract_verdict, kernel_circuit, observable_family,
    run_circuit,
)
from qcontract.channels import REFERENCE_PAIR

honest = kernel_circuit("honest", *REFERENCE_PAIR)
sneaky = kernel_circuit("sneaky", *REFERENCE_PAIR)

# the kernel value is the |00> probability, and S on each qubit leaves it alone
print("kernel value honest:", run_circuit(honest).probabilities[0])
print("kernel value sneaky:", run_circuit(sneaky).probabilities[0])

for tier in ("weak", "complete"):
    fam = observable_family(tier)
    dev = contract_deviation(compute_fingerprint(honest, fam), compute_fingerprint(sneaky, fam))
    print(f"\n{tier} family ({len(fam)} observables)")
    for label, d in dev.per_observable.items():
        print(f"  {label:5s} |dev| = {d:.4f}")
    print("  verdict at eps=0.15:", contract_verdict(dev, 0.15).value)
