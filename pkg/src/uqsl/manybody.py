"""XXZ chain, Neel-based mixed states and the reduced-dynamics QSL.

The global state evolves unitarily under the open-boundary XXZ Hamiltonian;
the bound is evaluated on the reduced state of the leftmost ``L_A`` sites,
with the Schatten speed bounded by ``2 Delta H`` through the chain
``||[H, rho0]||_1 <= 2 sqrt(F) <= 2 Delta H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import linalg as la
from .entropy import EntropyParams
from .errors import SizeLimit
from .qsl import BoundProfile, BoundReport, Trajectory, bound_profile

MAX_DIM = 4096
QFI_CUTOFF = 1e-12


@dataclass(frozen=True)
class SpinChainConfig:
    L: int
    J: float = 1.0
    Delta: float = 1.0
    p: float = 0.5
    L_A: int = 1

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"L must be at least 2, got {self.L}")
        if 2**self.L > MAX_DIM:
            raise SizeLimit(f"2^L = {2**self.L} exceeds the {MAX_DIM} limit")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 1 <= self.L_A <= self.L - 1:
            raise ValueError(f"L_A must lie in [1, L-1], got {self.L_A}")

    @property
    def d(self) -> int:
        return 2**self.L

    @property
    def L_B(self) -> int:
        return self.L - self.L_A

    @property
    def dims(self) -> tuple[int, int]:
        return 2**self.L_A, 2**self.L_B


def _site_operator(op: np.ndarray, j: int, L: int) -> np.ndarray:
    """``op`` on site ``j`` (0-based, leftmost factor first)."""
    return reduce(np.kron, [op if k == j else np.eye(2) for k in range(L)])


def xxz_hamiltonian(cfg: SpinChainConfig) -> np.ndarray:
    """``J sum_j (X_j X_j+1 + Y_j Y_j+1 + Delta Z_j Z_j+1)`` with open boundaries."""
    L = cfg.L
    H = np.zeros((cfg.d, cfg.d), dtype=complex)
    for j in range(L - 1):
        for s, w in zip(la.PAULI, (1.0, 1.0, cfg.Delta)):
            H += w * _site_operator(s, j, L) @ _site_operator(s, j + 1, L)
    return cfg.J * H


def total_magnetization(L: int) -> np.ndarray:
    return sum(_site_operator(la.SIGMA_Z, j, L) for j in range(L))


def neel_index(L: int) -> int:
    """Basis index of ``|1, 0, 1, 0, ...>`` (site 1 is the most significant bit)."""
    bits = "".join("1" if j % 2 == 0 else "0" for j in range(L))
    return int(bits, 2)


def neel_mixed_state(cfg: SpinChainConfig) -> np.ndarray:
    """``(1-p)/d I + p |Neel><Neel|``."""
    d = cfg.d
    rho = np.eye(d, dtype=complex) * (1 - cfg.p) / d
    k = neel_index(cfg.L)
    rho[k, k] += cfg.p
    return rho


class _Evolver:
    """Global unitary evolution from one eigendecomposition of ``H``."""

    def __init__(self, H: np.ndarray, rho0: np.ndarray):
        self.H = H
        self.w, self.V = np.linalg.eigh(H)
        # rho0 in the energy eigenbasis
        self.r0 = self.V.conj().T @ rho0 @ self.V

    def state(self, t: float) -> np.ndarray:
        ph = np.exp(-1j * self.w * t)
        rt = ph[:, None] * self.r0 * ph.conj()[None, :]
        out = self.V @ rt @ self.V.conj().T
        return (out + out.conj().T) / 2


def reduced_trajectory(cfg: SpinChainConfig, grid, speed_bound: float | None = None) -> Trajectory:
    """Reduced states ``Tr_B rho_t`` of the leftmost ``L_A`` sites.

    Speeds are the exact ``||Tr_B(-i[H, rho_t])||_1`` unless ``speed_bound``
    is given, in which case that constant is used for every sample.
    """
    times = np.asarray(grid, dtype=float)
    H = xxz_hamiltonian(cfg)
    rho0 = neel_mixed_state(cfg)
    dims = cfg.dims
    if cfg.p == 0:
        # the maximally mixed state is stationary
        d_a = dims[0]
        states = np.repeat((np.eye(d_a, dtype=complex) / d_a)[None], times.size, axis=0)
        speeds = np.zeros(times.size) if speed_bound is None else np.full(times.size, speed_bound)
        return Trajectory(times, states, speeds, validate=False, isospectral=True)
    ev = _Evolver(H, rho0)
    states, speeds = [], []
    for t in times:
        rho_t = ev.state(t)
        states.append(la.partial_trace(rho_t, dims, "A"))
        if speed_bound is None:
            gen = la.partial_trace(-1j * la.commutator(H, rho_t), dims, "A")
            speeds.append(la.trace_norm(gen))
    if speed_bound is not None:
        speeds = np.full(times.size, speed_bound)
    return Trajectory(times, np.array(states), np.array(speeds), validate=False)


def quantum_fisher_information(rho: np.ndarray, H: np.ndarray) -> float:
    """Fisher information of ``rho`` along ``H``, normalised so that ``F <= (Delta H)^2``.

    ``F = (1/2) sum_kl (p_k - p_l)^2 / (p_k + p_l) |<k|H|l>|^2`` over pairs with
    ``p_k + p_l > 1e-12``: a quarter of the symmetric-logarithmic-derivative
    Fisher information, so pure states give exactly the variance.
    """
    p, V = la.eigendecompose_hermitian(rho)
    Hk = V.conj().T @ H @ V
    s = p[:, None] + p[None, :]
    diff2 = (p[:, None] - p[None, :]) ** 2
    keep = s > QFI_CUTOFF
    terms = np.where(keep, diff2 / np.where(keep, s, 1.0), 0.0) * np.abs(Hk) ** 2
    return float(0.5 * terms.sum())


def energy_variance(rho: np.ndarray, H: np.ndarray) -> float:
    m1 = np.trace(rho @ H).real
    m2 = np.trace(rho @ H @ H).real
    return float(m2 - m1 * m1)


def variance_qfi_chain(cfg: SpinChainConfig) -> tuple[float, float, float]:
    """``((Delta H)^2, F(rho0), ||[H, rho0]||_1)`` for the Neel mixed state."""
    H = xxz_hamiltonian(cfg)
    rho0 = neel_mixed_state(cfg)
    return (
        energy_variance(rho0, H),
        quantum_fisher_information(rho0, H),
        la.trace_norm(la.commutator(H, rho0)),
    )


def xxz_variance_closed_form(cfg: SpinChainConfig) -> float:
    """``J^2 (L-1) [2(1+p) + (1-p)(1+(L-1)p) Delta^2]``."""
    L, p = cfg.L, cfg.p
    return cfg.J**2 * (L - 1) * (2 * (1 + p) + (1 - p) * (1 + (L - 1) * p) * cfg.Delta**2)


@dataclass(frozen=True)
class ManyBodyBoundReport(BoundReport):
    variance: float = 0.0
    qfi: float = 0.0
    comm_norm: float = 0.0

    def chain_holds(self, slack: float = 1e-9) -> bool:
        return (
            self.comm_norm <= 2 * math.sqrt(self.qfi) + slack
            and math.sqrt(self.qfi) <= math.sqrt(self.variance) + slack
        )


def mb_profile(cfg: SpinChainConfig, tau: float, grid, params: EntropyParams) -> tuple[BoundProfile, tuple]:
    """Bound profile with the constant speed ``2 Delta H`` on every prefix."""
    times = np.linspace(0.0, tau, int(grid)) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    chain = variance_qfi_chain(cfg)
    traj = reduced_trajectory(cfg, times, speed_bound=2 * math.sqrt(max(chain[0], 0.0)))
    return bound_profile(traj, params), chain


def mb_qsl(cfg: SpinChainConfig, tau: float, grid, params: EntropyParams) -> ManyBodyBoundReport:
    """``|Delta E| / (2 Delta H <<h_alpha[kappa_min(rho_t^A)]>>_tau)`` with its bound data."""
    prof, (var, qfi, comm) = mb_profile(cfg, tau, grid, params)
    base = prof.report()
    return ManyBodyBoundReport(**vars(base), variance=var, qfi=qfi, comm_norm=comm)


__all__ = [
    "ManyBodyBoundReport",
    "SpinChainConfig",
    "energy_variance",
    "mb_profile",
    "mb_qsl",
    "neel_index",
    "neel_mixed_state",
    "quantum_fisher_information",
    "reduced_trajectory",
    "total_magnetization",
    "variance_qfi_chain",
    "xxz_hamiltonian",
    "xxz_variance_closed_form",
]
