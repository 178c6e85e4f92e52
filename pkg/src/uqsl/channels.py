"""Kraus-channel evolution and the channel form of the QSL bound.

For ``rho_t = sum_l K_l(t) rho_0 K_l(t)^dagger`` the Schatten speed is at most
``2 sum_l ||K_l rho_0 Kdot_l^dagger||_1``; that quantity replaces the speed
inside the integrated bound. The amplitude-damping channel comes with the
closed forms for its smallest eigenvalue and QSL time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg as la
from .entropy import Branch, EntropyParams
from .errors import CompletenessViolation, DerivativeUnavailable, DimensionMismatch
from .linalg import BlochParams
from .qsl import (
    KAPPA_FLOOR,
    BoundProfile,
    BoundReport,
    Trajectory,
    bound_profile,
    cumulative_trapezoid,
    _check_bound_params,
)

COMPLETENESS_TOL = 1e-8

KrausSupplier = Callable[[float], Sequence[np.ndarray]]
CrossSupplier = Callable[[float, np.ndarray], Sequence[np.ndarray]]


@dataclass(frozen=True)
class KrausChannel:
    """A time-parametrised family of Kraus operators.

    Args:
        dim: Hilbert-space dimension.
        kraus_at: ``t -> [K_0(t), K_1(t), ...]``.
        kraus_dot_at: analytic time derivatives, or ``None`` to fall back on
            central differences with step ``1e-6 * max(1, t)``.
        cross_terms_at: optional ``(t, rho0) -> [K_l rho0 Kdot_l^dagger]``
            already simplified; used where ``Kdot`` alone is singular.
    """

    dim: int
    kraus_at: KrausSupplier
    kraus_dot_at: Optional[KrausSupplier] = None
    cross_terms_at: Optional[CrossSupplier] = None
    name: str = "channel"
    unitary: bool = False

    def operators(self, t: float) -> list[np.ndarray]:
        return [np.asarray(k, dtype=complex) for k in self.kraus_at(t)]

    def completeness_error(self, t: float) -> float:
        ks = self.operators(t)
        total = sum(k.conj().T @ k for k in ks)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def derivatives(self, t: float) -> list[np.ndarray]:
        if self.kraus_dot_at is not None:
            return [np.asarray(k, dtype=complex) for k in self.kraus_dot_at(t)]
        h = 1e-6 * max(1.0, t)
        if t - h < 0:
            # forward stencil at the start of the time axis
            k0, k1, k2 = self.operators(t), self.operators(t + h), self.operators(t + 2 * h)
            return [(-3 * a + 4 * b - c) / (2 * h) for a, b, c in zip(k0, k1, k2)]
        lo, hi = self.operators(t - h), self.operators(t + h)
        return [(b - a) / (2 * h) for a, b in zip(lo, hi)]

    def cross_terms(self, rho0: np.ndarray, t: float) -> list[np.ndarray]:
        if self.cross_terms_at is not None:
            return [np.asarray(c, dtype=complex) for c in self.cross_terms_at(t, rho0)]
        ks = self.operators(t)
        kdots = self.derivatives(t)
        with np.errstate(invalid="ignore", over="ignore"):
            out = [k @ rho0 @ kd.conj().T for k, kd in zip(ks, kdots)]
        if not all(np.all(np.isfinite(c)) for c in out):
            raise DerivativeUnavailable(f"Kraus derivative is not finite at t={t}")
        return out


def _check_dims(ch: KrausChannel, rho0: np.ndarray) -> None:
    if rho0.shape != (ch.dim, ch.dim):
        raise DimensionMismatch(f"state has shape {rho0.shape}, channel acts on dim {ch.dim}")


def evolve_channel(ch: KrausChannel, rho0, t: float) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    _check_dims(ch, rho0)
    err = ch.completeness_error(t)
    if err > COMPLETENESS_TOL:
        raise CompletenessViolation(f"sum K^dagger K deviates from I by {err:.2e} at t={t}")
    out = sum(k @ rho0 @ k.conj().T for k in ch.operators(t))
    return la.validate_density(out)


def channel_speed(ch: KrausChannel, rho0, t: float) -> float:
    """Exact ``||d rho_t/dt||_1``; ``d rho_t/dt = sum_l (C_l + C_l^dagger)``."""
    rho0 = np.asarray(rho0, dtype=complex)
    c = sum(ch.cross_terms(rho0, t))
    return la.trace_norm(c + c.conj().T)


def channel_speed_bound(ch: KrausChannel, rho0, t: float) -> float:
    """``2 sum_l ||K_l rho_0 Kdot_l^dagger||_1``."""
    rho0 = np.asarray(rho0, dtype=complex)
    _check_dims(ch, rho0)
    return 2.0 * sum(la.trace_norm(c) for c in ch.cross_terms(rho0, t))


def _as_grid(tau: float, grid) -> np.ndarray:
    if np.isscalar(grid):
        return np.linspace(0.0, tau, int(grid))
    times = np.asarray(grid, dtype=float)
    if times[0] != 0 or not math.isclose(times[-1], tau, rel_tol=0, abs_tol=1e-12 * max(1, tau)):
        raise ValueError("grid must run from 0 to tau")
    return times


def channel_trajectory(ch: KrausChannel, rho0, times, exact_speeds: bool = False) -> Trajectory:
    """Sample the channel on ``times``.

    ``speeds`` hold the Kraus speed bound by default, or the exact Schatten
    speed with ``exact_speeds=True``.
    """
    rho0 = la.validate_density(rho0)
    times = np.asarray(times, dtype=float)
    states = np.array([evolve_channel(ch, rho0, t) for t in times])
    f = channel_speed if exact_speeds else channel_speed_bound
    speeds = np.array([f(ch, rho0, t) for t in times])
    return Trajectory(times, states, speeds, validate=False, isospectral=ch.unitary)


def channel_profile(ch: KrausChannel, rho0, tau: float, grid, params: EntropyParams) -> BoundProfile:
    return bound_profile(channel_trajectory(ch, rho0, _as_grid(tau, grid)), params)


def channel_qsl(ch: KrausChannel, rho0, tau: float, grid, params: EntropyParams) -> BoundReport:
    """QSL time and relative error for the channel bound at final time ``tau``."""
    return channel_profile(ch, rho0, tau, grid, params).report()


# ---------------------------------------------------------------------------
# named channels


@dataclass(frozen=True)
class AmplitudeDampingParams:
    gamma: float
    bloch: BlochParams

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)


def amplitude_damping(params: AmplitudeDampingParams | float) -> KrausChannel:
    """``K0 = |0><0| + e^(-g t/2)|1><1|``, ``K1 = sqrt(1 - e^(-g t)) |0><1|``."""
    g = params.gamma if isinstance(params, AmplitudeDampingParams) else float(params)
    if not g > 0:
        raise ValueError(f"gamma must be positive, got {g}")

    def kraus(t):
        return [_P0 + math.exp(-g * t / 2) * _P1, math.sqrt(-math.expm1(-g * t)) * _LOWER]

    def kraus_dot(t):
        if t <= 0:
            raise DerivativeUnavailable("d/dt sqrt(1 - e^(-g t)) diverges at t = 0")
        s = math.sqrt(-math.expm1(-g * t))
        return [-0.5 * g * math.exp(-g * t / 2) * _P1, 0.5 * g * math.exp(-g * t) / s * _LOWER]

    def cross(t, rho0):
        c0 = (_P0 + math.exp(-g * t / 2) * _P1) @ rho0 @ (-0.5 * g * math.exp(-g * t / 2) * _P1)
        # sqrt(1-e^-gt) * d/dt sqrt(1-e^-gt) = g e^-gt / 2
        c1 = 0.5 * g * math.exp(-g * t) * rho0[1, 1] * _P0
        return [c0, c1]

    return KrausChannel(2, kraus, kraus_dot, cross, name="amplitude_damping")


def phase_damping(gamma: float) -> KrausChannel:
    """Dephasing ``K0 = sqrt((1+e^-gt)/2) I``, ``K1 = sqrt((1-e^-gt)/2) Z``.

    No analytic derivatives are attached, so it exercises the
    finite-difference path.
    """
    g = float(gamma)
    if not g > 0:
        raise ValueError(f"gamma must be positive, got {g}")

    def kraus(t):
        e = math.exp(-g * max(t, 0.0))
        return [math.sqrt((1 + e) / 2) * np.eye(2), math.sqrt((1 - e) / 2) * la.SIGMA_Z]

    return KrausChannel(2, kraus, name="phase_damping")


def unitary_channel(hamiltonian) -> KrausChannel:
    """Single Kraus operator ``exp(-i H t)``."""
    H = np.asarray(hamiltonian, dtype=complex)
    w, V = la.eigendecompose_hermitian(H)

    def kraus(t):
        return [(V * np.exp(-1j * w * t)) @ V.conj().T]

    def kraus_dot(t):
        return [-1j * H @ kraus(t)[0]]

    return KrausChannel(H.shape[0], kraus, kraus_dot, name="unitary", unitary=True)


# ---------------------------------------------------------------------------
# amplitude-damping closed forms


def ad_xi(params: AmplitudeDampingParams, t):
    r, th = params.bloch.r, params.bloch.theta
    decay = -np.expm1(-params.gamma * np.asarray(t, dtype=float))
    return 1 - r**2 + decay * (1 - r * math.cos(th)) ** 2


def ad_kappa_min(params: AmplitudeDampingParams, t):
    """Smallest eigenvalue ``(1 - sqrt(1 - e^(-g t) xi_t)) / 2`` of the damped qubit."""
    t = np.asarray(t, dtype=float)
    r, th = params.bloch.r, params.bloch.theta
    e = np.exp(-params.gamma * t)
    x = e * ad_xi(params, t)
    # squared Bloch length of the evolved state, 1 - x, without subtraction
    n2 = e * (r * math.sin(th)) ** 2 + (1 - e * (1 - r * math.cos(th))) ** 2
    with np.errstate(invalid="ignore"):
        # near the pure states 1 - sqrt(1 - x) is rewritten to avoid cancellation;
        # near the maximally mixed state the Bloch length is used directly
        out = np.where(n2 < 0.25, 0.5 * (1 - np.sqrt(n2)), 0.5 * x / (1 + np.sqrt(np.maximum(1 - x, 0.0))))
    return float(out) if out.ndim == 0 else out


def ad_initial_purity(params: AmplitudeDampingParams, alpha: float) -> float:
    r = params.bloch.r
    return 2.0**-alpha * ((1 - r) ** alpha + (1 + r) ** alpha)


def _ad_speed_factor(params: AmplitudeDampingParams, t: np.ndarray) -> np.ndarray:
    """``e^(-g t) (1 - r cos th + sqrt((1 - r cos th)^2 + e^(g t) r^2 sin^2 th))``."""
    r, th = params.bloch.r, params.bloch.theta
    a = 1 - r * math.cos(th)
    b = r * math.sin(th)
    e = np.exp(-params.gamma * t)
    return e * a + np.sqrt((e * a) ** 2 + e * b * b)


def ad_qsl_closed_form_profile(
    params: AmplitudeDampingParams, tau: float, grid, entropy_params: EntropyParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form amplitude-damping QSL time on every grid prefix.

    The time integral in the denominator is a trapezoid over the grid. For
    the Renyi branch (mu = 0) the mu in the numerator and the mu in the
    denominator's ``alpha mu`` prefactor cancel, giving ``|ln f_tau - ln f_0|``
    over ``alpha``. The Tsallis branch (mu = 1) is the formula itself.

    Returns:
        ``(times, tau_qsl, loose)``; loose prefixes carry ``tau_qsl = 0``.
    """
    _check_bound_params(entropy_params)
    times = _as_grid(tau, grid)
    a, m = entropy_params.alpha, entropy_params.mu
    kappa = ad_kappa_min(params, times)
    breach = kappa <= KAPPA_FLOOR
    loose = np.maximum.accumulate(breach)
    k = np.where(breach, 1.0, kappa)

    f_t = kappa**a + (1 - kappa) ** a
    f_0 = ad_initial_purity(params, a)
    if entropy_params.branch is Branch.RENYI:
        num = np.abs(np.log(f_t) - math.log(f_0))
    else:
        num = np.abs(np.expm1(m * np.log(f_t)) - math.expm1(m * math.log(f_0))) / m

    integrand = (1 - a + k) * k ** (a - 2) * _ad_speed_factor(params, times)
    integral = cumulative_trapezoid(integrand, times)
    den = 0.5 * params.gamma * a * integral
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, times * num / den, 0.0)
    out = np.where(loose, 0.0, out)
    return times, out, loose


def ad_qsl_closed_form(
    params: AmplitudeDampingParams, tau: float, grid, entropy_params: EntropyParams
) -> float:
    return float(ad_qsl_closed_form_profile(params, tau, grid, entropy_params)[1][-1])
