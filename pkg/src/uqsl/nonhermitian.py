"""Non-Hermitian evolution and the PT-symmetric qubit.

A non-Hermitian generator ``Ht = H + i Gamma`` evolves states by
``rho_t = U rho_0 U^dagger / Tr(...)`` with ``U = exp(-i t Ht)``. The
Schatten speed is bounded by the time-independent constant
``2 (||H||_inf + ||Gamma||_1 + ||Gamma||_inf)``.

For ``Ht = varpi sigma_x + i eta sigma_z`` the normalised state is known in
closed form on both sides of the exceptional point ``eta = varpi`` and at it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .entropy import EntropyParams
from .errors import DimensionMismatch, VanishingNorm
from .linalg import BlochParams
from .qsl import BoundProfile, BoundReport, Trajectory, bound_profile

NORM_FLOOR = 1e-14
EP_WINDOW = 1e-12
# largest ||Ht|| * dt propagated in one step before renormalising
MAX_STEP_EXPONENT = 10.0


@dataclass(frozen=True)
class NonHermitianHamiltonian:
    h_tilde: np.ndarray
    h: np.ndarray
    gamma_op: np.ndarray

    @property
    def dim(self) -> int:
        return self.h_tilde.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return not np.any(self.gamma_op)


def split_hermitian(h_tilde) -> NonHermitianHamiltonian:
    """Split ``Ht`` into ``H = (Ht + Ht^dagger)/2`` and ``Gamma = (Ht - Ht^dagger)/(2i)``."""
    Ht = la._as_square(h_tilde)
    h = (Ht + Ht.conj().T) / 2
    g = (Ht - Ht.conj().T) / 2j
    return NonHermitianHamiltonian(Ht.copy(), h, g)


def _propagate(Ht: np.ndarray, rho: np.ndarray, t: float) -> np.ndarray:
    scale = la.operator_norm(Ht) * t
    n_steps = max(1, math.ceil(scale / MAX_STEP_EXPONENT))
    U = la.matrix_exponential(-1j * (t / n_steps) * Ht)
    M = rho
    # log of the unnormalised trace, accumulated across renormalised steps
    log_trace = 0.0
    for _ in range(n_steps):
        M = U @ M @ U.conj().T
        tr = np.trace(M).real
        if tr > 0:
            log_trace += math.log(tr)
        if not tr > 0 or log_trace < math.log(NORM_FLOOR):
            total = math.exp(log_trace) if tr > 0 else 0.0
            raise VanishingNorm(f"Tr E_t(rho0) = {total:.3e} is below {NORM_FLOOR:.0e}")
        M = M / tr
    return M


def evolve_nonhermitian(nh: NonHermitianHamiltonian, rho0, t: float) -> np.ndarray:
    """Normalised state ``E_t(rho0) / Tr E_t(rho0)``.

    Long times are split into steps with ``||Ht|| dt <= 10`` and the state is
    renormalised after each, so the unnormalised trace never overflows.

    Raises:
        VanishingNorm: if the unnormalised trace drops below 1e-14.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != nh.h_tilde.shape:
        raise DimensionMismatch(f"state {rho0.shape} vs generator {nh.h_tilde.shape}")
    if t == 0:
        return la.validate_density(rho0)
    M = _propagate(nh.h_tilde, rho0, t)
    return la.validate_density((M + M.conj().T) / 2)


def generator_rhs(nh: NonHermitianHamiltonian, rho: np.ndarray) -> np.ndarray:
    """``-i[H, rho] + {Gamma, rho} - 2 <Gamma> rho``."""
    g_mean = np.trace(nh.gamma_op @ rho).real
    return (
        -1j * la.commutator(nh.h, rho)
        + la.anticommutator(nh.gamma_op, rho)
        - 2 * g_mean * rho
    )


def _five_point_derivative(states: np.ndarray, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fourth-order central differences at the interior samples of a uniform grid."""
    h = np.diff(times)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("the residual check needs a uniform time grid")
    d = (-states[4:] + 8 * states[3:-1] - 8 * states[1:-3] + states[:-4]) / (12 * h[0])
    return np.arange(2, len(times) - 2), d


def equation_of_motion_residual(nh: NonHermitianHamiltonian, traj: Trajectory) -> float:
    """Largest ``||drho/dt - rhs||_1`` over interior samples of a uniform grid."""
    if len(traj) < 5:
        raise ValueError("need at least five samples")
    idx, d = _five_point_derivative(traj.states, traj.times)
    return max(la.trace_norm(d[k] - generator_rhs(nh, traj.states[i])) for k, i in enumerate(idx))


def nh_speed_bound(nh: NonHermitianHamiltonian) -> float:
    """``2 (||H||_inf + ||Gamma||_1 + ||Gamma||_inf)``."""
    return 2.0 * (la.operator_norm(nh.h) + la.trace_norm(nh.gamma_op) + la.operator_norm(nh.gamma_op))


def nh_trajectory(nh: NonHermitianHamiltonian, rho0, times, exact_speeds: bool = False) -> Trajectory:
    """Propagated states on ``times``; speeds are the constant bound unless ``exact_speeds``."""
    rho0 = la.validate_density(rho0)
    times = np.asarray(times, dtype=float)
    states = np.array([evolve_nonhermitian(nh, rho0, t) for t in times])
    if exact_speeds:
        speeds = np.array([la.trace_norm(generator_rhs(nh, s)) for s in states])
    else:
        speeds = np.full(times.size, nh_speed_bound(nh))
    return Trajectory(times, states, speeds, validate=False, isospectral=nh.is_hermitian)


def nh_profile(nh: NonHermitianHamiltonian, rho0, tau: float, grid, params: EntropyParams) -> BoundProfile:
    times = np.linspace(0.0, tau, int(grid)) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    return bound_profile(nh_trajectory(nh, rho0, times), params)


def nh_qsl(nh: NonHermitianHamiltonian, rho0, tau: float, grid, params: EntropyParams) -> BoundReport:
    return nh_profile(nh, rho0, tau, grid, params).report()


# ---------------------------------------------------------------------------
# PT-symmetric qubit


@dataclass(frozen=True)
class PTQubitParams:
    varpi: float
    eta: float
    bloch: BlochParams

    def __post_init__(self):
        if not self.varpi > 0:
            raise ValueError(f"varpi must be positive, got {self.varpi}")
        if not self.eta >= 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")

    @property
    def phase(self) -> str:
        gap = self.eta - self.varpi
        if abs(gap) < EP_WINDOW:
            return "exceptional"
        return "unbroken" if gap < 0 else "broken"

    @property
    def period(self) -> float:
        """Recurrence time ``pi / sqrt(varpi^2 - eta^2)`` of the unbroken phase."""
        if self.phase != "unbroken":
            return math.inf
        return math.pi / math.sqrt(self.varpi**2 - self.eta**2)


def pt_hamiltonian(params: PTQubitParams) -> np.ndarray:
    return params.varpi * la.SIGMA_X + 1j * params.eta * la.SIGMA_Z


def _assemble(rho0_scaled: np.ndarray, scalar, vec, norm) -> np.ndarray:
    if not abs(norm) > NORM_FLOOR:
        raise VanishingNorm(f"closed-form normalisation {norm} too small")
    M = rho0_scaled + scalar * np.eye(2) + sum(v * s for v, s in zip(vec, la.PAULI))
    M = M / norm
    return (M + M.conj().T) / 2


def _unbroken(w: float, eta: float, r: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    om = math.sqrt(w * w - eta * eta)
    u = np.array([w, 0, 1j * eta]) / om
    uc = u.conj()
    s2 = math.sin(om * t) ** 2
    s = math.sin(2 * om * t)
    c = 2 * (u @ uc + 1j * np.cross(uc, u) @ r - 1) * s2 - 1j * ((u - uc) @ r) * s
    q = s * (np.cross(u + uc, r) - 1j * (u - uc)) + 2 * s2 * (
        (u @ r) * uc + (uc @ r) * u - (1 + u @ uc) * r + 1j * np.cross(u, uc)
    )
    return _assemble(4 * rho0, c, q, (4 + 2 * c).real)


def _broken(w: float, eta: float, r: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    k = math.sqrt(eta * eta - w * w)
    u = -1j * np.array([w, 0, 1j * eta]) / k
    uc = u.conj()
    x = k * t
    # numerator and denominator multiplied by 4 e^(-2x) so nothing overflows
    em2 = math.exp(-2 * x)
    s2 = (-math.expm1(-2 * x)) ** 2  # 4 e^(-2x) sinh^2 x
    s = 2 * (-math.expm1(-4 * x))  # 4 e^(-2x) sinh 2x
    h = 2 * (u @ uc + 1j * np.cross(uc, u) @ r + 1) * s2 + ((u + uc) @ r) * s
    v = 1j * s * (np.cross(u - uc, r) - 1j * (u + uc)) + 2 * s2 * (
        (u @ r) * uc + (uc @ r) * u + (1 - u @ uc) * r + 1j * np.cross(u, uc)
    )
    return _assemble(16 * em2 * rho0, h, v, (16 * em2 + 2 * h).real)


def _exceptional(w: float, r: np.ndarray, t: float) -> np.ndarray:
    r1, r2, r3 = r
    wt = w * t
    g = wt * (r3 + wt * (1 + r2))
    den = 1 + 2 * g
    if not den > NORM_FLOOR:
        raise VanishingNorm(f"closed-form normalisation {den} too small")
    zeta = np.array([r1 / den, (r2 - 2 * g) / den, (r3 + 2 * wt * (1 + r2)) / den])
    return la.bloch_to_matrix(zeta)


def pt_closed_form(params: PTQubitParams, t: float) -> np.ndarray:
    """Normalised state of the PT qubit at time ``t`` from the closed forms.

    The phase is chosen by ``eta - varpi``; within 1e-12 of the exceptional
    point the polynomial (gapless) form is used.

    Raises:
        VanishingNorm: if the normalising denominator is below 1e-14.
    """
    r = params.bloch.vector
    rho0 = la.bloch_to_matrix(r)
    if t == 0:
        return rho0
    w, eta = params.varpi, params.eta
    phase = params.phase
    if phase == "unbroken":
        return _unbroken(w, eta, r, rho0, t)
    if phase == "broken":
        return _broken(w, eta, r, rho0, t)
    return _exceptional(w, r, t)


def pt_trajectory(params: PTQubitParams, times) -> Trajectory:
    """Closed-form states on ``times`` with the constant ``2 varpi + 6 eta`` speed bound."""
    times = np.asarray(times, dtype=float)
    states = np.array([pt_closed_form(params, t) for t in times])
    speeds = np.full(times.size, 2 * params.varpi + 6 * params.eta)
    return Trajectory(times, states, speeds, validate=False, isospectral=params.eta == 0)


def kappa_min_profile(params: PTQubitParams, grid) -> np.ndarray:
    """Smallest eigenvalue ``(1 - |r_t|)/2`` of the closed-form state on each grid time."""
    out = []
    for t in np.asarray(grid, dtype=float):
        norm = float(np.linalg.norm(la.bloch_vector(pt_closed_form(params, t))))
        out.append(max(0.0, 0.5 * (1 - norm)))
    return np.array(out)


__all__ = [
    "NonHermitianHamiltonian",
    "PTQubitParams",
    "equation_of_motion_residual",
    "evolve_nonhermitian",
    "generator_rhs",
    "kappa_min_profile",
    "nh_profile",
    "nh_qsl",
    "nh_speed_bound",
    "nh_trajectory",
    "pt_closed_form",
    "pt_hamiltonian",
    "pt_trajectory",
    "split_hermitian",
]
