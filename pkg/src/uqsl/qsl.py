"""Entropy-change bound, relative error and QSL time over sampled trajectories.

Every scenario (channels, non-Hermitian, many-body) reduces to a
:class:`Trajectory` whose ``speeds`` column holds the speed term that
multiplies the weight ``h_alpha[kappa_min]`` under the time integral: the
Schatten speed itself, or one of its upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg as la
from .entropy import (
    SPECTRAL_ZERO,
    Branch,
    EntropyParams,
    entropy_from_spectrum,
    purity_from_spectrum,
)
from .errors import (
    DomainError,
    EmptyInput,
    EmptyTrajectory,
    InvalidParams,
    SingularState,
    ZeroDenominator,
)

KAPPA_FLOOR = 1e-9


def weight_h(alpha: float, x):
    """``alpha/(1-alpha) * (1 - alpha + x) * x**(alpha-2)`` for 0 < alpha < 1, x > 0."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("weight_h needs x > 0")
    out = alpha / (1 - alpha) * (1 - alpha + x) * x ** (alpha - 2)
    return float(out) if out.ndim == 0 else out


def purity_rate_bound(alpha: float, kappa):
    """Coefficient ``(kappa + 1 - alpha) kappa**(alpha-2)`` bounding ``|d f_alpha/dt|``."""
    kappa = np.asarray(kappa, dtype=float)
    return (kappa + 1 - alpha) * kappa ** (alpha - 2)


def finite_difference(values, times) -> np.ndarray:
    """Central differences inside the grid, one-sided at the two ends."""
    return np.gradient(np.asarray(values), np.asarray(times, dtype=float), axis=0)


def finite_difference_speeds(times, states) -> np.ndarray:
    """``||d rho/dt||_1`` per sample from finite differences of the states."""
    drho = finite_difference(np.asarray(states), times)
    return np.array([la.trace_norm(m) for m in drho])


@dataclass
class Trajectory:
    """Time grid, sampled states and per-sample speed values.

    ``times`` start at 0 and increase strictly. When ``speeds`` is omitted
    it is filled with finite-difference Schatten speeds. ``isospectral``
    marks dynamics known to preserve the spectrum (unitary evolution); the
    spectrum of the first state is then reused for every sample so that
    entropy changes vanish exactly rather than to rounding.
    """

    times: np.ndarray
    states: np.ndarray
    speeds: np.ndarray | None = None
    validate: bool = True
    isospectral: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        n = self.times.size
        if n == 0:
            raise EmptyTrajectory("trajectory has no samples")
        if self.states.ndim != 3 or self.states.shape[0] != n:
            raise ValueError(f"states shape {self.states.shape} does not match {n} times")
        if self.times[0] != 0:
            raise ValueError("time grid must start at 0")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if self.validate:
            self.states = np.array([la.validate_density(s) for s in self.states])
        if self.speeds is None:
            if n < 2:
                raise EmptyTrajectory("need at least two samples to difference")
            self.speeds = finite_difference_speeds(self.times, self.states)
        self.speeds = np.asarray(self.speeds, dtype=float)
        if self.speeds.shape != (n,):
            raise ValueError("speeds must have one value per sample")
        if np.any(self.speeds < 0) or not np.all(np.isfinite(self.speeds)):
            raise ValueError("speeds must be finite and nonnegative")

    def __len__(self) -> int:
        return self.times.size

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @cached_property
    def spectra(self) -> np.ndarray:
        if self.isospectral:
            s = np.repeat(np.linalg.eigvalsh(self.states[0])[None], len(self), axis=0)
        else:
            s = np.linalg.eigvalsh(self.states)
        return np.clip(s, 0.0, None)

    @cached_property
    def kappa(self) -> np.ndarray:
        return self.spectra[:, 0].copy()

    def entropies(self, params: EntropyParams) -> np.ndarray:
        out = np.empty(len(self))
        for i, p in enumerate(self.spectra):
            p = np.where(p <= SPECTRAL_ZERO, 0.0, p)
            out[i] = entropy_from_spectrum(p, params)
        return out

    def purities(self, alpha: float) -> np.ndarray:
        spectra = np.where(self.spectra <= SPECTRAL_ZERO, 0.0, self.spectra)
        return np.array([purity_from_spectrum(p, alpha) for p in spectra])

    def rescaled(self, c: float) -> "Trajectory":
        """Same path traversed with times ``c t`` (speeds divide by ``c``)."""
        return Trajectory(
            self.times * c, self.states, self.speeds / c, validate=False, isospectral=self.isospectral
        )


def _check_bound_params(params: EntropyParams) -> None:
    if not 0 < params.alpha < 1:
        raise InvalidParams(f"the bound needs 0 < alpha < 1, got alpha={params.alpha}")
    if params.branch is Branch.VON_NEUMANN:
        raise InvalidParams("the weight function diverges for alpha -> 1")
    if not 0 <= params.mu <= 1:
        raise InvalidParams(f"the bound needs 0 <= mu <= 1, got mu={params.mu}")


def cumulative_trapezoid(y, x) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(y)
    if y.size > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


@dataclass
class BoundProfile:
    """Bound quantities for every prefix ``[0, t_k]`` of a trajectory.

    Prefixes in which ``kappa_min`` dips below the floor are flagged loose;
    their integrated bound is ``inf`` and hence ``delta = 1`` and
    ``tau_qsl = 0``. Where the bound is exactly zero ``delta`` is NaN.
    """

    params: EntropyParams
    times: np.ndarray
    entropy: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    loose: np.ndarray
    delta: np.ndarray = field(init=False)
    tau_qsl: np.ndarray = field(init=False)

    def __post_init__(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.rhs > 0, self.lhs / self.rhs, np.nan)
        ratio = np.where(np.isinf(self.rhs), 0.0, ratio)
        self.delta = 1.0 - ratio
        self.tau_qsl = np.where(np.isnan(ratio), 0.0, self.times * ratio)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.delta)

    def report(self, k: int = -1) -> "BoundReport":
        return BoundReport(
            lhs=float(self.lhs[k]),
            rhs=float(self.rhs[k]),
            delta=float(self.delta[k]),
            tau_qsl=float(self.tau_qsl[k]),
            tau=float(self.times[k]),
            flag_loose=bool(self.loose[k]),
            # mu = 0 or 1 sits on the edge of the range the bound is derived for
            flag_boundary=not self.params.in_derivation_range,
        )


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    delta: float
    tau_qsl: float
    tau: float
    flag_loose: bool = False
    flag_boundary: bool = False

    def satisfied(self, slack: float = 1e-9) -> bool:
        return self.lhs <= self.rhs + slack and self.tau_qsl <= self.tau + slack


def bound_profile(traj: Trajectory, params: EntropyParams, prefactor: float = 1.0) -> BoundProfile:
    """Evaluate the integrated entropy bound on every grid prefix.

    The integrand is ``prefactor * h_alpha[kappa_min(rho_t)] * speed_t`` and
    the integral is a composite trapezoid over the trajectory's own grid.
    """
    _check_bound_params(params)
    ent = traj.entropies(params)
    lhs = np.abs(ent - ent[0])
    kappa = traj.kappa
    breach = kappa <= KAPPA_FLOOR
    loose = np.maximum.accumulate(breach)
    safe_kappa = np.where(breach, 1.0, kappa)
    integrand = prefactor * weight_h(params.alpha, safe_kappa) * traj.speeds
    rhs = cumulative_trapezoid(integrand, traj.times)
    rhs = np.where(loose, np.inf, rhs)
    return BoundProfile(params, traj.times.copy(), ent, lhs, rhs, loose)


def integrated_bound(traj: Trajectory, params: EntropyParams) -> float:
    """``int_0^tau h_alpha[kappa_min(rho_t)] ||d rho_t/dt||_1 dt`` (trapezoid).

    Raises:
        SingularState: if ``kappa_min`` reaches the 1e-9 floor anywhere.
    """
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    if np.any(traj.kappa <= KAPPA_FLOOR):
        raise SingularState(
            f"kappa_min reaches {traj.kappa.min():.2e}; the weight function diverges there"
        )
    return float(bound_profile(traj, params).rhs[-1])


def entropy_change(traj: Trajectory, params: EntropyParams) -> float:
    ent = traj.entropies(params)
    return float(abs(ent[-1] - ent[0]))


def relative_error(traj: Trajectory, params: EntropyParams) -> tuple[float, np.ndarray]:
    """Final relative error and its profile over all grid prefixes.

    Raises:
        ZeroDenominator: if the bound over the full trajectory is zero.
    """
    prof = bound_profile(traj, params)
    if not prof.defined[-1]:
        raise ZeroDenominator("integrated bound is zero; relative error undefined")
    return float(prof.delta[-1]), prof.delta


def qsl_time(traj: Trajectory, params: EntropyParams) -> float:
    """``|Delta E| / <<h_alpha speed>>_tau``, which equals ``tau (1 - delta)``."""
    prof = bound_profile(traj, params)
    if not prof.defined[-1]:
        raise ZeroDenominator("time-averaged bound is zero; QSL time undefined")
    return float(prof.tau_qsl[-1])


def bound_report(traj: Trajectory, params: EntropyParams) -> BoundReport:
    return bound_profile(traj, params).report()


def normalize_series(xs) -> np.ndarray:
    """Min-max rescale to [0, 1]; NaN entries are ignored and kept.

    A constant series maps to all zeros.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise EmptyInput("cannot normalise an empty series")
    finite = np.isfinite(xs)
    if not finite.any():
        raise EmptyInput("series has no finite element")
    lo = xs[finite].min()
    hi = xs[finite].max()
    if hi == lo:
        return np.where(finite, 0.0, np.nan)
    return np.where(finite, (xs - lo) / (hi - lo), np.nan)


@dataclass
class RateCheck:
    n_checked: int
    violations: int
    worst_margin: float
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _derivative_error_scale(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Rough size of the finite-difference error at each sample."""
    n = values.size
    est = np.zeros(n)
    if n < 3:
        return est
    d1 = finite_difference(values, times)
    if n >= 5:
        coarse = np.full(n, np.nan)
        coarse[2:-2] = (values[4:] - values[:-4]) / (times[4:] - times[:-4])
        est[2:-2] = np.abs(d1[2:-2] - coarse[2:-2])
    h = np.diff(times)
    second = np.abs(np.diff(values, 2)) / h[:-1]
    edge = np.concatenate([[second[0]], second, [second[-1]]])
    mask = np.ones(n, dtype=bool)
    if n >= 5:
        mask[2:-2] = False
    est[mask] = edge[mask]
    return est


def purity_rate_bound_check(traj: Trajectory, alpha: float, slack: float = 1e-6) -> RateCheck:
    """Sample-wise ``|d f_alpha/dt| <= (k + 1 - alpha) k^(alpha-2) speed``.

    ``d f_alpha/dt`` comes from finite differences on the grid; the allowed
    slack is ``slack`` plus an estimate of the differencing error.

    Raises:
        SingularState: if any state has ``kappa_min`` at or below the floor.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if np.any(traj.kappa <= KAPPA_FLOOR):
        raise SingularState("trajectory passes through a (numerically) singular state")
    f = traj.purities(alpha)
    lhs = np.abs(finite_difference(f, traj.times)) if len(traj) > 1 else np.zeros(1)
    rhs = purity_rate_bound(alpha, traj.kappa) * traj.speeds
    err = _derivative_error_scale(f, traj.times)
    margin = rhs + slack + err - lhs
    return RateCheck(len(traj), int(np.sum(margin < 0)), float(margin.min()), lhs, rhs)


def entropy_rate_check(
    traj: Trajectory, params: EntropyParams, speed_bound, slack: float = 1e-6
) -> RateCheck:
    """Sample-wise ``|dE/dt| <= h_alpha[kappa_min] * speed_bound`` by finite differences."""
    ent = traj.entropies(params)
    lhs = np.abs(finite_difference(ent, traj.times))
    kappa = traj.kappa
    if np.any(kappa <= KAPPA_FLOOR):
        raise SingularState("trajectory passes through a (numerically) singular state")
    rhs = weight_h(params.alpha, kappa) * np.broadcast_to(speed_bound, kappa.shape)
    err = _derivative_error_scale(ent, traj.times)
    margin = rhs + slack + err - lhs
    return RateCheck(len(traj), int(np.sum(margin < 0)), float(margin.min()), lhs, rhs)


def time_average(values, times) -> float:
    times = np.asarray(times, dtype=float)
    span = times[-1] - times[0]
    if span <= 0:
        raise ZeroDenominator("zero-length time window")
    return float(cumulative_trapezoid(values, times)[-1] / span)


def constant_trajectory(rho, times) -> Trajectory:
    times = np.asarray(times, dtype=float)
    states = np.repeat(np.asarray(rho)[None], times.size, axis=0)
    return Trajectory(times, states, np.zeros(times.size), isospectral=True)


__all__ = [
    "KAPPA_FLOOR",
    "BoundProfile",
    "BoundReport",
    "RateCheck",
    "Trajectory",
    "bound_profile",
    "bound_report",
    "constant_trajectory",
    "cumulative_trapezoid",
    "entropy_change",
    "entropy_rate_check",
    "finite_difference",
    "finite_difference_speeds",
    "integrated_bound",
    "normalize_series",
    "purity_rate_bound",
    "purity_rate_bound_check",
    "qsl_time",
    "relative_error",
    "time_average",
    "weight_h",
]
