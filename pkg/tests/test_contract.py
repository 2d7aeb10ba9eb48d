import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcontract.channels import REFERENCE_PAIR, kernel_circuit, observable_family
from qcontract.contract import (
    EXACT, AuditEntry, Decision, Fingerprint, StageSpec, Verdict, canonical_json,
    compute_fingerprint, contract_deviation, contract_verdict,
    detection_probability_lower_bound, run_verifier, spec_hash, verify_audit_chain,
)
from qcontract.simcore import NoiseModel, derive_rng

LOCAL = observable_family("complete")
HONEST = kernel_circuit("honest", *REFERENCE_PAIR)
SNEAKY = kernel_circuit("sneaky", *REFERENCE_PAIR)
unit = st.floats(-1, 1, allow_nan=False)


def _spec(eps=0.15, family=LOCAL):
    return StageSpec(tuple(family), eps, {"kind": "honest"})


def test_spec_hash_is_content_addressed():
    a = spec_hash(LOCAL, 0.15, {"kind": "honest"})
    assert a == spec_hash([o.label for o in LOCAL], 0.15, {"kind": "honest"})
    assert a != spec_hash(LOCAL, 0.1500000001, {"kind": "honest"})
    assert a != spec_hash(LOCAL[::-1], 0.15, {"kind": "honest"})
    assert len(a) == 64


def test_canonical_json_stable():
    assert canonical_json({"b": 0.1, "a": [1, 2.5]}) == canonical_json({"a": [1, 2.5], "b": 0.1})
    assert '"0.10000000000000001"' in canonical_json(0.1)


def test_stage_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        _spec(eps=0.0)
    with pytest.raises(ValueError):
        _spec(eps=2.5)
    with pytest.raises(ValueError):
        _spec(family=())
    spec = _spec()
    again = StageSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again.spec_hash == spec.spec_hash and again.labels == spec.labels
    bad = dict(spec.to_dict(), epsilon_A=0.2)
    with pytest.raises(ValueError):
        StageSpec.from_dict(bad)


def test_fingerprint_validation():
    with pytest.raises(ValueError):
        Fingerprint(("X1",), (1.5,))
    with pytest.raises(ValueError):
        Fingerprint(("X1", "Y1"), (0.1,))
    with pytest.raises(ValueError):
        Fingerprint(("X1",), (0.1,), shots=0)
    fp = Fingerprint(("X1", "Y1"), (0.1, -0.2), 100, {"k": 1})
    assert Fingerprint.from_dict(json.loads(json.dumps(fp.to_dict()))) == fp
    assert fp["Y1"] == -0.2


def test_fingerprint_exact_vs_shots():
    exact = compute_fingerprint(HONEST, LOCAL)
    assert exact.shots == EXACT
    counts = {}
    shot = compute_fingerprint(HONEST, LOCAL, 50_000, rng=derive_rng(0), counts_out=counts)
    assert set(counts) == set(exact.labels)
    assert all(c.total_shots == 50_000 for c in counts.values())
    assert contract_deviation(exact, shot).max_dev < 5 / math.sqrt(50_000)


def test_fingerprint_seed_reproducible():
    a = compute_fingerprint(HONEST, LOCAL, 100, NoiseModel(), derive_rng(11))
    b = compute_fingerprint(HONEST, LOCAL, 100, NoiseModel(), derive_rng(11))
    assert a == b


def test_deviation_mismatched_families():
    with pytest.raises(ValueError):
        contract_deviation(Fingerprint(("X1",), (0.0,)), Fingerprint(("Y1",), (0.0,)))


@given(st.lists(st.tuples(unit, unit), min_size=1, max_size=15))
def test_deviation_is_linf(pairs):
    labels = tuple(f"O{i}" for i in range(len(pairs)))
    a = Fingerprint(labels, tuple(p[0] for p in pairs))
    b = Fingerprint(labels, tuple(p[1] for p in pairs))
    dev = contract_deviation(a, b)
    assert dev.max_dev == max(abs(x - y) for x, y in pairs)
    assert contract_deviation(b, a).max_dev == dev.max_dev
    assert contract_deviation(a, a).max_dev == 0


@given(st.lists(st.tuples(unit, unit), min_size=1, max_size=8), st.floats(0.001, 2.0))
def test_verdict_is_full_family_max(pairs, eps):
    labels = tuple(f"O{i}" for i in range(len(pairs)))
    dev = contract_deviation(Fingerprint(labels, tuple(p[0] for p in pairs)),
                             Fingerprint(labels, tuple(p[1] for p in pairs)))
    expected = Verdict.ACCEPT if all(abs(x - y) <= eps for x, y in pairs) else Verdict.HALT
    assert contract_verdict(dev, eps) is expected
    assert (dev.exceeds(eps) == []) == (expected is Verdict.ACCEPT)


def test_verifier_accepts_honest_exact_reference():
    spec = _spec()
    ref = compute_fingerprint(HONEST, LOCAL)
    rep = run_verifier(spec, ref, HONEST, rounds=40, shots_per_round=2280, rng=derive_rng(1))
    assert rep.verdict is Verdict.ACCEPT and rep.halted_round is None
    assert len(rep.trail) == 40
    assert all(e.decision is Decision.DRIFT_LOGGED for e in rep.trail)
    assert verify_audit_chain(rep.trail, spec.spec_hash)
    assert rep.trail[0].prev_hash == spec.spec_hash


def test_verifier_halts_on_sneaky():
    spec = _spec()
    ref = compute_fingerprint(HONEST, LOCAL)
    rep = run_verifier(spec, ref, SNEAKY, rounds=200, shots_per_round=2280, rng=derive_rng(2))
    assert rep.verdict is Verdict.HALT
    assert rep.trail[-1].decision is Decision.HALT
    assert len(rep.trail) == rep.halted_round
    assert rep.trail[-1].observable in ("X1", "X2", "Y2")
    assert verify_audit_chain(rep.trail, spec.spec_hash)


def test_verifier_uniform_draw():
    spec = _spec()
    ref = compute_fingerprint(HONEST, LOCAL)
    # epsilon 2 never halts, so every round draws
    rep = run_verifier(_spec(eps=2.0), ref, HONEST, rounds=3000, shots_per_round=1, rng=derive_rng(5))
    freq = np.bincount([spec.labels.index(e.observable) for e in rep.trail], minlength=6) / 3000
    assert np.all(np.abs(freq - 1 / 6) < 4 * math.sqrt((1 / 6) * (5 / 6) / 3000))


def test_verifier_rejects_mismatched_reference():
    with pytest.raises(ValueError):
        run_verifier(_spec(), Fingerprint(("X1",), (0.0,)), HONEST, 1, 1)
    with pytest.raises(ValueError):
        run_verifier(_spec(), compute_fingerprint(HONEST, LOCAL), HONEST, 0, 1)


def _trail():
    spec = _spec(eps=2.0)
    rep = run_verifier(spec, compute_fingerprint(HONEST, LOCAL), HONEST, 12, 64, rng=derive_rng(9))
    return spec.spec_hash, list(rep.trail)


def test_audit_roundtrip_and_tamper():
    anchor, trail = _trail()
    again = [AuditEntry.from_dict(json.loads(json.dumps(e.to_dict()))) for e in trail]
    assert verify_audit_chain(again, anchor)
    assert not verify_audit_chain(trail, "0" * 64)
    assert not verify_audit_chain(trail[1:], anchor)
    swapped = trail[:]
    swapped[3], swapped[4] = swapped[4], swapped[3]
    assert not verify_audit_chain(swapped, anchor)
    forged = trail[:]
    forged[5] = dataclasses.replace(forged[5], mu_hat=forged[5].mu_hat + 1e-12)
    assert not verify_audit_chain(forged, anchor)


def test_detection_probability_bound():
    assert detection_probability_lower_bound(0.5, 1) == 0.5
    assert detection_probability_lower_bound(0.5, 10) == pytest.approx(1 - 2 ** -10)
