"""Dense complex linear algebra used by every other module.

Density matrices are plain ``numpy`` arrays; :func:`validate_density` is the
single gate that checks them. Tensor products follow the convention that
subsystem A is the leftmost (slowest-varying) factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .errors import (
    DimensionMismatch,
    InvalidOrder,
    MatrixOverflow,
    NegativeEigenvalue,
    NotHermitian,
    NotSquare,
    TraceNotOne,
)

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_CLAMP = -1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

DensityMatrix = np.ndarray


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {M.shape}")
    return M


def hermitian_deviation(M: np.ndarray) -> float:
    """Largest entrywise ``|M - M^dagger|``."""
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def validate_density(M, tol: float = HERM_TOL) -> DensityMatrix:
    """Check that ``M`` is a density matrix and return a cleaned copy.

    The returned matrix is exactly Hermitian, eigenvalues in
    ``[EIG_CLAMP, 0)`` are clamped to zero, and the trace is renormalised
    to one afterwards.

    Raises:
        NotSquare, NotHermitian, TraceNotOne, NegativeEigenvalue
    """
    M = _as_square(M)
    if not np.all(np.isfinite(M)):
        raise NotHermitian("matrix has non-finite entries")
    dev = hermitian_deviation(M)
    if dev > tol:
        raise NotHermitian(f"max |M - M^dagger| = {dev:.3e} exceeds {tol:.1e}")
    tr = np.trace(M).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace is {tr!r}")
    H = (M + M.conj().T) / 2
    w, V = np.linalg.eigh(H)
    if w[0] < EIG_CLAMP:
        raise NegativeEigenvalue(f"smallest eigenvalue {w[0]:.3e} below {EIG_CLAMP:.0e}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        H = (V * w) @ V.conj().T
        H = (H + H.conj().T) / 2
        H /= np.trace(H).real
    return H


def is_density(M) -> bool:
    try:
        validate_density(M)
    except (NotSquare, NotHermitian, TraceNotOne, NegativeEigenvalue):
        return False
    return True


@dataclass(frozen=True)
class BlochParams:
    """Spherical coordinates of a qubit Bloch vector."""

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return self.r * np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


def bloch_to_matrix(vec) -> np.ndarray:
    """``(I + vec . sigma) / 2`` without validation."""
    x, y, z = vec
    return 0.5 * (np.eye(2, dtype=complex) + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def from_bloch(b: BlochParams) -> DensityMatrix:
    return validate_density(bloch_to_matrix(b.vector))


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Real Bloch vector ``Tr(rho sigma_i)`` of a qubit operator."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got {rho.shape}")
    return np.array([np.trace(rho @ s).real for s in PAULI])


def eigendecompose_hermitian(M, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix."""
    M = _as_square(M)
    dev = hermitian_deviation(M)
    if dev > tol:
        raise NotHermitian(f"max |M - M^dagger| = {dev:.3e} exceeds {tol:.1e}")
    return np.linalg.eigh((M + M.conj().T) / 2)


def eigenvalues(rho) -> np.ndarray:
    rho = _as_square(rho)
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2)


def kappa_min(rho) -> float:
    """Smallest eigenvalue of a density matrix, clipped at zero."""
    return max(float(eigenvalues(rho)[0]), 0.0)


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise NotSquare(f"expected a matrix, got ndim={M.ndim}")
    return np.linalg.svd(M, compute_uv=False)


def schatten_norm(M, p: float = 1) -> float:
    """Schatten p-norm ``(sum_i s_i^p)^(1/p)`` over the singular values.

    ``p`` may be ``np.inf`` (operator norm).
    """
    if not p >= 1:
        raise InvalidOrder(f"Schatten order must be >= 1, got {p}")
    s = singular_values(M)
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(s[0])
    if p == 1:
        return float(np.sum(s))
    if p == 2:
        return float(np.sqrt(np.sum(s * s)))
    smax = s[0]
    if smax == 0:
        return 0.0
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))


def trace_norm(M) -> float:
    return schatten_norm(M, 1)


def operator_norm(M) -> float:
    return schatten_norm(M, np.inf)


def trace_distance(a, b) -> float:
    """Unnormalised trace distance ``||a - b||_1`` (range [0, 2])."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return schatten_norm(a - b, 1)


def partial_trace(
    op, dims: tuple[int, int], keep: Literal["A", "B"] = "A"
) -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``C^dA (x) C^dB``.

    Works for any square operator, not just states, so it can reduce
    generators such as ``-i[H, rho]`` too.
    """
    op = _as_square(op)
    d_a, d_b = dims
    if d_a * d_b != op.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not multiply to {op.shape[0]}")
    t = op.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("jijk->ik", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def matrix_exponential(A) -> np.ndarray:
    """``exp(A)`` for a square complex matrix.

    Hermitian and anti-Hermitian inputs go through an eigendecomposition;
    everything else (non-normal generators such as ``-i t H`` for a
    non-Hermitian ``H``) uses scaling-and-squaring with a Pade approximant.

    Raises:
        MatrixOverflow: if the result is not representable.
    """
    A = _as_square(A)
    if not np.all(np.isfinite(A)):
        raise MatrixOverflow("input has non-finite entries")
    scale = max(float(np.max(np.abs(A))), 1.0) if A.size else 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        if hermitian_deviation(A) <= 1e-14 * scale:
            w, V = np.linalg.eigh((A + A.conj().T) / 2)
            out = (V * np.exp(w)) @ V.conj().T
        elif float(np.max(np.abs(A + A.conj().T))) <= 1e-14 * scale:
            # A = -i K with K Hermitian
            K = 1j * A
            w, V = np.linalg.eigh((K + K.conj().T) / 2)
            out = (V * np.exp(-1j * w)) @ V.conj().T
        else:
            out = scipy.linalg.expm(A)
    if not np.all(np.isfinite(out)):
        raise MatrixOverflow("matrix exponential overflowed")
    return out


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Hilbert-Schmidt random state (Ginibre ``G G^dagger`` normalised)."""
    k = dim if rank is None else rank
    G = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def pure_state(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())
