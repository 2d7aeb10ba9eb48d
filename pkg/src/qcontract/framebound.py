"""Frame-bound constants of Pauli families and unitary-channel diamond distances.

The frame-bound constant of a family is

    C = sup { sum_O |c_O| : || sum_O c_O O || <= 1 },

equivalently the supremum of the scale-invariant ratio
``sum|c| / opnorm(sum c_O O)``. For any family of local Paulis (X, Y, Z on each
wire) it is sqrt(3); richer two-qubit families are solved numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .simcore import PAULI_1Q, PauliObservable

HERMITIAN_ATOL = 1e-12


def pauli_matrix(obs: PauliObservable) -> np.ndarray:
    """Dense matrix in the little-endian basis used by the simulator."""
    m = np.ones((1, 1), dtype=complex)
    # qubit 0 is the least significant index, so it is the rightmost Kronecker factor
    for p in reversed(obs.factors):
        m = np.kron(m, PAULI_1Q[p])
    return m


def _jacobi_symmetric_eigenvalues(a: np.ndarray, tol: float = 1e-15,
                                  max_sweeps: int = 100) -> np.ndarray:
    a = np.array(a, dtype=float)
    n = a.shape[0]
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
    return np.sort(np.diag(a))


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi.

    The complex matrix ``B + iC`` is embedded as the real symmetric
    ``[[B, -C], [C, B]]``, whose spectrum is that of ``m`` with every eigenvalue
    doubled; every other entry of the sorted spectrum is returned.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(m, m.conj().T, atol=HERMITIAN_ATOL * max(1.0, np.abs(m).max())):
        raise ValueError("matrix is not Hermitian")
    b, c = m.real, m.imag
    embedded = np.block([[b, -c], [c, b]])
    return _jacobi_symmetric_eigenvalues(embedded)[::2]


def hermitian_opnorm(m: np.ndarray) -> float:
    """Operator norm (largest |eigenvalue|) of a Hermitian matrix."""
    eig = hermitian_eigenvalues(m)
    return float(max(abs(eig[0]), abs(eig[-1])))


def frame_bound_analytic_local(n_qubits: int) -> float:
    """sqrt(3) for the local family {X_i, Y_i, Z_i}, whatever the qubit count.

    Blocks on disjoint qubits add in operator norm, and each block obeys
    Cauchy-Schwarz with equality at c_X = c_Y = c_Z.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    return math.sqrt(3.0)


def _family_matrices(family: Sequence[PauliObservable]) -> np.ndarray:
    if not family:
        raise ValueError("empty observable family")
    mats = np.array([pauli_matrix(o) for o in family])
    if not np.any(mats):
        raise ValueError("degenerate family: zero span")
    return mats


def frame_ratio(coeffs: np.ndarray, mats: np.ndarray) -> float:
    """sum|c| / opnorm(sum c_O O); LAPACK eigvalsh keeps the optimizer loop fast."""
    m = np.tensordot(coeffs, mats, axes=1)
    eig = np.linalg.eigvalsh(m)
    norm = max(abs(eig[0]), abs(eig[-1]))
    if norm < 1e-300:
        return 0.0
    return float(np.sum(np.abs(coeffs)) / norm)


def _batch_ratio(directions: np.ndarray, mats: np.ndarray) -> np.ndarray:
    ms = np.einsum("nk,kij->nij", directions, mats)
    eig = np.linalg.eigvalsh(ms)
    norms = np.maximum(np.abs(eig[:, 0]), np.abs(eig[:, -1]))
    return np.abs(directions).sum(axis=1) / np.maximum(norms, 1e-300)


@dataclass
class FrameBoundResult:
    C_estimate: float
    witness_coefficients: np.ndarray
    labels: tuple[str, ...]
    restarts_used: int
    objective_trace: list[float] = field(default_factory=list)
    standard_error: float = 0.0

    def to_dict(self) -> dict:
        return {
            "C_estimate": self.C_estimate,
            "witness_coefficients": dict(zip(self.labels, map(float, self.witness_coefficients))),
            "restarts_used": self.restarts_used,
            "objective_trace": list(self.objective_trace),
            "standard_error": self.standard_error,
        }


def frame_bound_numeric(family: Sequence[PauliObservable], restarts: int = 200,
                        iters: int = 500, rng: np.random.Generator | int | None = None,
                        n_random: int = 256, simplex_scale: float = 0.1,
                        xtol: float = 1e-9, polish: int = 3) -> FrameBoundResult:
    """Random search followed by Nelder-Mead refinement, repeated over restarts.

    Each restart screens ``n_random`` uniform unit directions, starts a
    Nelder-Mead simplex (edge ``simplex_scale``) at the best one, and re-seeds the
    simplex at the converged point up to ``polish`` times. ``standard_error`` is the
    standard error of the restarts that landed within 1e-3 of the best value.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    mats = _family_matrices(family)
    k = len(family)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def neg(c):
        return -frame_ratio(c, mats)

    best_val, best_c = -1.0, None
    trace: list[float] = []
    for _ in range(restarts):
        d = rng.normal(size=(n_random, k))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        c = d[int(np.argmax(_batch_ratio(d, mats)))]
        val = frame_ratio(c, mats)
        for _ in range(max(1, polish)):
            simplex = np.vstack([c, c + simplex_scale * np.eye(k)])
            res = minimize(neg, c, method="Nelder-Mead",
                           options={"maxiter": iters, "initial_simplex": simplex,
                                    "xatol": xtol, "fatol": 1e-14, "adaptive": k > 4})
            if -res.fun <= val + 1e-13:
                break
            c = res.x / np.linalg.norm(res.x)
            val = frame_ratio(c, mats)
        trace.append(val)
        if val > best_val:
            best_val, best_c = val, c
    vals = np.array(trace)
    basin = vals[vals >= best_val - 1e-3]
    se = float(basin.std(ddof=1) / math.sqrt(basin.size)) if basin.size > 1 else 0.0
    return FrameBoundResult(best_val, best_c, tuple(o.label for o in family), restarts,
                            trace, se)


def _check_unitary(u: np.ndarray, name: str) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"{name} is not square")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
        raise ValueError(f"{name} is not unitary")
    return u


def _segment_distance(a: complex, b: complex) -> float:
    """Distance from the origin to the segment [a, b] in the complex plane."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom < 1e-30:
        return abs(a)
    t = min(1.0, max(0.0, -(a.conjugate() * ab).real / denom))
    return abs(a + t * ab)


def diamond_distance_unitary(u: np.ndarray, v: np.ndarray, atol: float = 1e-12) -> float:
    """Diamond-norm distance between the channels rho -> U rho U^dag and V rho V^dag.

    Equals ``2 sqrt(1 - r^2)`` with ``r`` the distance from 0 to the convex hull
    of the eigenvalues of ``U^dag V``.
    """
    u, v = _check_unitary(u, "U"), _check_unitary(v, "V")
    if u.shape != v.shape:
        raise ValueError("U and V differ in dimension")
    eig = np.linalg.eigvals(u.conj().T @ v)
    eig = eig / np.abs(eig)
    order = np.argsort(np.angle(eig))
    pts: list[complex] = []
    for z in eig[order]:
        if not pts or abs(z - pts[-1]) > 1e-9:
            pts.append(complex(z))
    if len(pts) > 1 and abs(pts[0] - pts[-1]) <= 1e-9:
        pts.pop()
    # points on the unit circle in angular order form a convex polygon
    if len(pts) >= 3:
        crosses = [(pts[i].conjugate() * pts[(i + 1) % len(pts)]).imag for i in range(len(pts))]
        if min(crosses) >= -atol:
            return 2.0
    if len(pts) == 1:
        r = 1.0
    else:
        r = min(_segment_distance(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts)))
    return 2.0 * math.sqrt(max(0.0, 1.0 - min(r, 1.0) ** 2))
