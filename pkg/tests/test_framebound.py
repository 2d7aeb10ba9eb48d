import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from qcontract.channels import DriftParams, kernel_circuit, observable_family, REFERENCE_PAIR
from qcontract.contract import compute_fingerprint, contract_deviation
from qcontract.framebound import (
    diamond_distance_unitary, frame_bound_analytic_local, frame_bound_numeric, frame_ratio,
    hermitian_eigenvalues, hermitian_opnorm, pauli_matrix, _family_matrices,
)
from qcontract.simcore import RX, RZ, PauliObservable, circuit_unitary, derive_rng
import oracles


def power_iteration_opnorm(m, iters=3000):
    # largest |eigenvalue| of Hermitian m from the dominant eigenvalue of m^2
    v = np.ones(m.shape[0], complex) / math.sqrt(m.shape[0]) + 0.1j * np.arange(m.shape[0])
    m2 = m @ m
    for _ in range(iters):
        v = m2 @ v
        v /= np.linalg.norm(v)
    return math.sqrt(abs(np.vdot(v, m2 @ v)))


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


@pytest.mark.parametrize("d", [1, 2, 4, 8, 16])
def test_jacobi_eigenvalues(d):
    rng = np.random.default_rng(d)
    m = random_hermitian(rng, d)
    np.testing.assert_allclose(hermitian_eigenvalues(m), np.linalg.eigvalsh(m), atol=1e-10)
    assert abs(hermitian_opnorm(m) - power_iteration_opnorm(m)) < 1e-8


def test_opnorm_known_values():
    x = pauli_matrix(PauliObservable.from_label("X1", 1))
    y = pauli_matrix(PauliObservable.from_label("Y1", 1))
    z = pauli_matrix(PauliObservable.from_label("Z1", 1))
    assert hermitian_opnorm((x + y + z) / math.sqrt(3)) == pytest.approx(1.0, abs=1e-12)
    assert hermitian_opnorm(np.zeros((4, 4))) == 0.0
    with pytest.raises(ValueError):
        hermitian_opnorm(np.array([[0, 1], [0, 0]]))


def test_pauli_matrix_little_endian():
    # Z on wire 1 (qubit 0) flips sign on odd indices
    np.testing.assert_array_equal(np.diag(pauli_matrix(PauliObservable.from_label("Z1"))).real,
                                  [1, -1, 1, -1])


def test_local_analytic():
    assert frame_bound_analytic_local(1) == frame_bound_analytic_local(4) == pytest.approx(oracles.C_LOCAL)
    mats = _family_matrices(observable_family("complete"))
    assert frame_ratio(np.ones(6), mats) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert frame_ratio(np.ones(6), mats) <= frame_bound_analytic_local(2) + 1e-12


@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_frame_ratio_never_exceeds_local_bound(c):
    mats = _family_matrices(observable_family("complete"))
    assert frame_ratio(np.array(c), mats) <= math.sqrt(3) + 1e-9


def test_tier3_witness_attains_closed_form():
    fam = observable_family("tier3")
    mats = _family_matrices(fam)
    res = frame_bound_numeric(fam, restarts=40, rng=derive_rng(0))
    assert frame_ratio(res.witness_coefficients, mats) == pytest.approx(res.C_estimate)
    assert res.C_estimate <= oracles.C_TIER3 + 1e-9
    assert res.C_estimate == pytest.approx(oracles.C_TIER3, abs=0.01)
    assert len(res.objective_trace) == 40 and res.to_dict()["restarts_used"] == 40


def test_numeric_reproducible():
    fam = observable_family("complete")
    a = frame_bound_numeric(fam, restarts=5, rng=derive_rng(3))
    b = frame_bound_numeric(fam, restarts=5, rng=derive_rng(3))
    assert a.C_estimate == b.C_estimate
    with pytest.raises(ValueError):
        frame_bound_numeric(fam, restarts=0)
    with pytest.raises(ValueError):
        frame_bound_numeric([])


def bloch_grid_diamond(w, n=2001):
    # single-qubit oracle: 2 sqrt(1 - min_psi |<psi|W|psi>|^2) over a Bloch grid
    best = 2.0
    for th in np.linspace(0, math.pi, n):
        ph = np.linspace(0, 2 * math.pi, 121)
        v0, v1 = math.cos(th / 2), np.exp(1j * ph) * math.sin(th / 2)
        val = np.abs(w[0, 0] * v0 * v0 + w[0, 1] * v0 * v1 + w[1, 0] * np.conj(v1) * v0
                     + w[1, 1] * np.abs(v1) ** 2)
        best = min(best, val.min())
    return 2 * math.sqrt(max(0.0, 1 - best ** 2))


def test_diamond_closed_forms():
    s = np.diag([1, 1j])
    assert diamond_distance_unitary(np.eye(2), s) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert diamond_distance_unitary(np.eye(2), np.diag([1, -1])) == pytest.approx(2.0)
    assert diamond_distance_unitary(s, s) == pytest.approx(0.0, abs=1e-6)
    # global phase is invisible
    assert diamond_distance_unitary(np.eye(2), 1j * np.eye(2)) == pytest.approx(0.0, abs=1e-6)
    # eigenphases 0, 2pi/3, 4pi/3 surround the origin
    w = np.exp(2j * math.pi * np.arange(3) / 3)
    assert diamond_distance_unitary(np.eye(3), np.diag(w)) == 2.0
    with pytest.raises(ValueError):
        diamond_distance_unitary(np.eye(2), np.ones((2, 2)))
    with pytest.raises(ValueError):
        diamond_distance_unitary(np.eye(2), np.eye(4))


@pytest.mark.parametrize("seed", range(6))
def test_diamond_vs_bloch_grid(seed):
    u = unitary_group.rvs(2, random_state=seed)
    v = unitary_group.rvs(2, random_state=seed + 100)
    assert diamond_distance_unitary(u, v) == pytest.approx(bloch_grid_diamond(u.conj().T @ v), abs=2e-3)


angle = st.floats(-0.6, 0.6)


@given(st.tuples(angle, angle), st.tuples(angle, angle), st.tuples(angle, angle), st.tuples(angle, angle))
@settings(max_examples=25, deadline=None)
def test_composed_drift_deviation_within_summed_distances(a1, b1, a2, b2):
    # two drift stages in sequence; deviation is bounded by the sum of per-stage distances
    fam = observable_family("tier3")
    d1, d2 = DriftParams(a1, b1), DriftParams(a2, b2)
    honest = kernel_circuit("honest", *REFERENCE_PAIR)
    one = kernel_circuit("drift", *REFERENCE_PAIR, drift=d1)
    both = one.append(*(g for q in range(2) for g in (RZ(d2.beta[q], q), RX(d2.alpha[q], q))))
    u0 = circuit_unitary(honest)
    dist1 = diamond_distance_unitary(u0, circuit_unitary(one))
    dist2 = diamond_distance_unitary(circuit_unitary(one), circuit_unitary(both))
    dev = contract_deviation(compute_fingerprint(honest, fam), compute_fingerprint(both, fam))
    assert dev.max_dev <= dist1 + dist2 + 1e-9
