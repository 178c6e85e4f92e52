"""Unified (alpha, mu)-entropies and the alpha-purity they are built from.

The generic member is

    E(rho) = ((Tr rho^alpha)^mu - 1) / ((1 - alpha) mu)

with the Renyi (mu -> 0), Tsallis (mu = 1) and von Neumann (alpha -> 1)
members selected explicitly through :class:`Branch`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import linalg as la
from .errors import InvalidAlpha, InvalidParams, QuadratureFailure, SingularState

RANK_TOL = 1e-10
# eigenvalues at or below this are treated as exact zeros (0^alpha := 0)
SPECTRAL_ZERO = 1e-14


class Branch(enum.Enum):
    GENERIC = "generic"
    RENYI = "renyi"
    TSALLIS = "tsallis"
    VON_NEUMANN = "von_neumann"


@dataclass(frozen=True)
class EntropyParams:
    """Selects one member of the unified entropy family.

    Use :meth:`of` to map a raw ``(alpha, mu)`` pair onto a branch: ``mu == 0``
    means Renyi, ``alpha == 1`` von Neumann and ``mu == 1`` Tsallis. The
    mapping is by exact value only; no small-parameter detection happens.
    """

    alpha: float
    mu: float
    branch: Branch = Branch.GENERIC

    def __post_init__(self):
        a, m, b = self.alpha, self.mu, self.branch
        if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
            raise InvalidParams(f"alpha must be a positive finite number, got {a!r}")
        if b is Branch.VON_NEUMANN:
            if a != 1:
                raise InvalidParams("von Neumann branch requires alpha == 1")
            return
        if a == 1:
            raise InvalidParams("alpha == 1 needs the VON_NEUMANN branch")
        if b is Branch.GENERIC and m == 0:
            raise InvalidParams("mu == 0 needs the RENYI branch")
        if b is Branch.TSALLIS and m != 1:
            raise InvalidParams("Tsallis branch requires mu == 1")
        if b is Branch.RENYI and m != 0:
            raise InvalidParams("Renyi branch requires mu == 0")

    @classmethod
    def of(cls, alpha: float, mu: float) -> "EntropyParams":
        alpha, mu = float(alpha), float(mu)
        if alpha == 1:
            return cls(1.0, mu, Branch.VON_NEUMANN)
        if mu == 0:
            return cls(alpha, 0.0, Branch.RENYI)
        if mu == 1:
            return cls(alpha, 1.0, Branch.TSALLIS)
        return cls(alpha, mu, Branch.GENERIC)

    @property
    def in_derivation_range(self) -> bool:
        """True when 0 < alpha < 1 and 0 < mu < 1, the range the QSL bounds assume."""
        return 0 < self.alpha < 1 and 0 < self.mu < 1


def _spectrum(rho) -> np.ndarray:
    p = la.eigenvalues(rho)
    p[p <= SPECTRAL_ZERO] = 0.0
    return p


def purity_from_spectrum(p: np.ndarray, alpha: float) -> float:
    p = p[p > 0]
    return float(np.sum(p**alpha))


def alpha_purity(rho, alpha: float) -> float:
    """``Tr(rho^alpha)`` from the spectrum, using the convention ``0^alpha = 0``."""
    if not alpha > 0:
        raise InvalidAlpha(f"alpha must be positive, got {alpha}")
    return purity_from_spectrum(_spectrum(rho), alpha)


def alpha_purity_quadrature_oracle(rho, alpha: float, tol: float = 1e-6) -> float:
    """``Tr(rho^alpha)`` from the resolvent integral instead of the spectrum.

    For ``0 < alpha < 1``::

        Tr rho^alpha = sin(pi alpha)/pi * int_0^inf du u^(alpha-1) Tr((rho + u)^-1 rho)

    The integral is mapped to ``s in (0, 1)`` with ``u = k s / (1 - s)``,
    ``k`` the smallest eigenvalue, and the algebraic end-point factors are
    handed to QUADPACK's weighted rule. Orders ``alpha > 1`` are split as
    ``n + beta`` and the integrand carries ``rho^(n+1)``; integer orders
    reduce to ``Tr(rho^n)`` by repeated multiplication.

    Raises:
        SingularState: if ``rho`` has an eigenvalue below 1e-12.
        QuadratureFailure: if the error estimate exceeds ``tol``.
    """
    if not alpha > 0:
        raise InvalidAlpha(f"alpha must be positive, got {alpha}")
    rho = np.asarray(rho, dtype=complex)
    n = int(math.floor(alpha))
    beta = alpha - n
    if beta == 0:
        return float(np.trace(np.linalg.matrix_power(rho, n)).real)

    k = float(la.eigenvalues(rho)[0])
    if k <= 1e-12:
        raise SingularState(f"smallest eigenvalue {k:.3e} too small for the resolvent integral")
    d = rho.shape[0]
    eye = np.eye(d)
    top = np.linalg.matrix_power(rho, n + 1)
    top_trace = float(np.trace(top).real)

    def integrand(s: float) -> float:
        if s >= 1.0:
            return k ** (beta - 1) * top_trace
        u = k * s / (1.0 - s)
        g = np.trace(np.linalg.solve(rho + u * eye, top)).real
        return k**beta * g / (1.0 - s)

    val, err = integrate.quad(
        integrand, 0.0, 1.0, weight="alg", wvar=(beta - 1.0, -beta),
        epsabs=1e-13, epsrel=1e-11, limit=200,
    )
    pref = math.sin(math.pi * beta) / math.pi
    if pref * err > tol:
        raise QuadratureFailure(f"quadrature error estimate {pref * err:.2e} above {tol:.0e}")
    return float(pref * val)


def entropy_from_purity(f: float, params: EntropyParams) -> float:
    """Unified entropy as a function of the alpha-purity (not for von Neumann)."""
    a, m = params.alpha, params.mu
    if params.branch is Branch.VON_NEUMANN:
        raise InvalidParams("von Neumann entropy is not a function of one alpha-purity")
    if params.branch is Branch.RENYI:
        return math.log(f) / (1 - a)
    if params.branch is Branch.TSALLIS or m == 1:
        return (f - 1) / (1 - a)
    return _expm1_ratio(m, math.log(f)) / (1 - a)


def _expm1_ratio(m: float, log_x: float) -> float:
    """``(x^m - 1) / m`` written as ``log_x * expm1(y)/y`` so tiny ``m`` cannot underflow."""
    y = m * log_x
    return log_x if y == 0 else log_x * (math.expm1(y) / y)


def von_neumann_from_spectrum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_from_spectrum(p: np.ndarray, params: EntropyParams) -> float:
    if params.branch is Branch.VON_NEUMANN:
        val = von_neumann_from_spectrum(p)
    else:
        val = entropy_from_purity(purity_from_spectrum(p, params.alpha), params)
    # negative values are round-off only
    return max(val, 0.0)


def unified_entropy(rho, params: EntropyParams) -> float:
    return entropy_from_spectrum(_spectrum(rho), params)


def renyi_entropy(rho, alpha: float) -> float:
    return unified_entropy(rho, EntropyParams(alpha, 0.0, Branch.RENYI))


def tsallis_entropy(rho, alpha: float) -> float:
    return unified_entropy(rho, EntropyParams(alpha, 1.0, Branch.TSALLIS))


def von_neumann_entropy(rho) -> float:
    return unified_entropy(rho, EntropyParams(1.0, 0.0, Branch.VON_NEUMANN))


def numerical_rank(rho, tol: float = RANK_TOL) -> int:
    return int(np.sum(la.eigenvalues(rho) > tol))


def entropy_rank_bound(rho, params: EntropyParams) -> float:
    """Upper bound ``((rank)^((1-alpha) mu) - 1) / ((1-alpha) mu)``.

    The rank counts eigenvalues above 1e-10. Renyi and von Neumann branches
    use the limit ``ln(rank)``.
    """
    r = numerical_rank(rho)
    if params.branch in (Branch.RENYI, Branch.VON_NEUMANN):
        return math.log(r)
    return _expm1_ratio((1 - params.alpha) * params.mu, math.log(r))


# ---------------------------------------------------------------------------
# property battery


@dataclass
class PropertyCheck:
    name: str
    applicable: bool
    n_checked: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def record(self, margin: float, tol: float) -> None:
        self.n_checked += 1
        self.worst_margin = min(self.worst_margin, margin)
        if margin < -tol:
            self.violations += 1


@dataclass
class PropertyReport:
    params: EntropyParams
    checks: list[PropertyCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            if not c.applicable:
                lines.append(f"{c.name:<24} n/a  {c.note}")
            else:
                status = "PASS" if c.passed else "FAIL"
                lines.append(
                    f"{c.name:<24} {status} n={c.n_checked} violations={c.violations} "
                    f"worst_margin={c.worst_margin:.3e}"
                )
        return "\n".join(lines)


def check_nonnegativity(states, params, tol=1e-10) -> PropertyCheck:
    c = PropertyCheck("nonnegativity", True)
    for rho in states:
        c.record(unified_entropy(rho, params), tol)
    return c


def check_unitary_invariance(states, unitaries, params, tol=1e-10) -> PropertyCheck:
    c = PropertyCheck("unitary_invariance", True)
    for rho, V in zip(states, unitaries):
        moved = V @ rho @ V.conj().T
        c.record(-abs(unified_entropy(moved, params) - unified_entropy(rho, params)), tol)
    return c


def check_rank_bound(states, params, tol=1e-10) -> PropertyCheck:
    c = PropertyCheck("rank_bound", True)
    for rho in states:
        c.record(entropy_rank_bound(rho, params) - unified_entropy(rho, params), tol)
    return c


def lipschitz_constant(params: EntropyParams) -> float:
    a = params.alpha
    return math.inf if a == 1 else 1.0 / abs(a * (a - 1))


def check_lipschitz(pairs, params, tol=1e-10) -> PropertyCheck:
    """``|E(r1) - E(r2)| <= |alpha(alpha-1)|^-1 ||r1 - r2||_1`` for 0 < alpha < 1.

    Only checked for alpha < 1. For alpha > 1 the inequality is false: with
    alpha = 2, mu = 1, ``|0><0|`` against ``diag(1-e, e)`` gives a left side
    of ``2e - 2e^2`` and a right side of ``e``. Even for alpha < 1 it fails
    for close, nearly pure pairs (the slope of ``p^alpha`` is unbounded at
    zero); it holds on generic Hilbert-Schmidt random pairs.
    """
    const = lipschitz_constant(params)
    c = PropertyCheck("lipschitz", 0 < params.alpha < 1)
    if not c.applicable:
        c.note = "only holds for 0 < alpha < 1"
        return c
    for r1, r2 in pairs:
        lhs = abs(unified_entropy(r1, params) - unified_entropy(r2, params))
        c.record(const * la.trace_distance(r1, r2) - lhs, tol)
    return c


def check_concavity(ensembles, params, tol=1e-10) -> PropertyCheck:
    """``sum_l p_l E(rho_l) <= E(sum_l p_l rho_l)`` for 0 < alpha < 1, 0 <= mu <= 1."""
    ok = 0 < params.alpha < 1 and 0 <= params.mu <= 1
    c = PropertyCheck("concavity", ok)
    if not ok:
        c.note = "needs 0 < alpha < 1 and 0 <= mu <= 1"
        return c
    for probs, states in ensembles:
        mix = sum(p * s for p, s in zip(probs, states))
        avg = sum(p * unified_entropy(s, params) for p, s in zip(probs, states))
        c.record(unified_entropy(mix, params) - avg, tol)
    return c


def subadditivity_direction(params: EntropyParams) -> str:
    """'le', 'ge' or 'eq' for ``E(r1 (x) r2)`` versus ``E(r1) + E(r2)``."""
    a, m = params.alpha, params.mu
    if params.branch in (Branch.RENYI, Branch.VON_NEUMANN):
        return "eq"
    if (0 < a < 1 and m < 0) or (a >= 1 and m >= 0):
        return "le"
    return "ge"


def check_subadditivity(pairs, params, tol=1e-10) -> PropertyCheck:
    c = PropertyCheck("subadditivity", True)
    direction = subadditivity_direction(params)
    c.note = direction
    for r1, r2 in pairs:
        joint = unified_entropy(np.kron(r1, r2), params)
        split = unified_entropy(r1, params) + unified_entropy(r2, params)
        if direction == "le":
            c.record(split - joint, tol)
        elif direction == "ge":
            c.record(joint - split, tol)
        else:
            c.record(-abs(joint - split), 1e-10)
    return c


def pinch(rho, projectors) -> np.ndarray:
    return sum(P @ rho @ P for P in projectors)


def check_measurement_monotonicity(cases, params, tol=1e-10) -> PropertyCheck:
    """``E(rho) <= E(sum_l P_l rho P_l)`` for complete projective measurements."""
    c = PropertyCheck("projective_measurement", True)
    for rho, projectors in cases:
        c.record(unified_entropy(pinch(rho, projectors), params) - unified_entropy(rho, params), tol)
    return c


def check_triangle(bipartite, params, tol=1e-10) -> PropertyCheck:
    """``|E(rho_1) - E(rho_2)| <= E(rho_12)`` for alpha > 1, mu >= 1/alpha."""
    a, m = params.alpha, params.mu
    ok = a > 1 and m >= 1 / a
    c = PropertyCheck("triangle", ok)
    if not ok:
        c.note = "needs alpha > 1 and mu >= 1/alpha"
        return c
    for rho12, dims in bipartite:
        r1 = la.partial_trace(rho12, dims, keep="A")
        r2 = la.partial_trace(rho12, dims, keep="B")
        lhs = abs(unified_entropy(r1, params) - unified_entropy(r2, params))
        c.record(unified_entropy(rho12, params) - lhs, tol)
    return c


def random_projectors(dim: int, rng: np.random.Generator) -> list[np.ndarray]:
    """A complete set of orthogonal projectors: a random basis split into random blocks."""
    U = la.random_unitary(dim, rng)
    n_blocks = int(rng.integers(1, dim + 1))
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_blocks - 1, replace=False)) if n_blocks > 1 else []
    blocks = np.split(np.arange(dim), cuts)
    return [U[:, b] @ U[:, b].conj().T for b in blocks]


def property_battery(
    params: EntropyParams,
    rng: np.random.Generator,
    n_instances: int = 200,
    dims=(2, 3, 4),
) -> PropertyReport:
    """Draw random instances and check every listed entropy property.

    States are Hilbert-Schmidt random with random rank; dimensions cycle
    through ``dims``. Properties outside their stated parameter range are
    reported as not applicable.
    """

    def draw(i, full_rank=False):
        d = dims[i % len(dims)]
        rank = d if full_rank else int(rng.integers(1, d + 1))
        return la.random_density(d, rng, rank)

    report = PropertyReport(params)
    states = [draw(i) for i in range(n_instances)]
    report.checks.append(check_nonnegativity(states, params))
    report.checks.append(
        check_unitary_invariance(states, [la.random_unitary(s.shape[0], rng) for s in states], params)
    )
    report.checks.append(check_rank_bound(states, params))

    pairs = []
    for i in range(n_instances):
        a = draw(i, full_rank=True)
        pairs.append((a, la.random_density(a.shape[0], rng)))
    report.checks.append(check_lipschitz(pairs, params))

    ensembles = []
    for i in range(n_instances):
        d = dims[i % len(dims)]
        k = int(rng.integers(2, 5))
        ensembles.append((rng.dirichlet(np.ones(k)), [la.random_density(d, rng, int(rng.integers(1, d + 1))) for _ in range(k)]))
    report.checks.append(check_concavity(ensembles, params))

    products = [(draw(i), draw(i + 1)) for i in range(n_instances)]
    report.checks.append(check_subadditivity(products, params))

    cases = [(s, random_projectors(s.shape[0], rng)) for s in states]
    report.checks.append(check_measurement_monotonicity(cases, params))

    bipartite = []
    for i in range(n_instances):
        dims_ab = ((2, 2), (2, 3), (3, 2))[i % 3]
        d = dims_ab[0] * dims_ab[1]
        if i % 2 == 0:
            rho12 = la.random_density(d, rng, int(rng.integers(1, d + 1)))
        else:
            rho12 = np.kron(la.random_density(dims_ab[0], rng), la.random_density(dims_ab[1], rng))
        bipartite.append((rho12, dims_ab))
    report.checks.append(check_triangle(bipartite, params))
    return report
