"""Scenario runners behind the ``uqsl run`` command.

Each scenario turns a :class:`ScenarioConfig` into one or more *cases* (a
single trajectory each: one decay rate, one ``eta/varpi`` ratio, one chain
length, ...). For every case and every ``(alpha, mu)`` on the entropy grid the
bound profile is evaluated on all prefixes of the time grid, and each
requested quantity is written to its own long-format CSV.
"""

from __future__ import annotations

import ast
import csv
import hashlib
import importlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import linalg as la
from .channels import (
    AmplitudeDampingParams,
    KrausChannel,
    ad_qsl_closed_form_profile,
    amplitude_damping,
    channel_trajectory,
)
from .config import (
    ScenarioConfig,
    as_float,
    as_float_list,
    as_int,
    as_int_list,
    write_flat,
)
from .entropy import EntropyParams, purity_from_spectrum
from .errors import ConfigError, SingularState, UQSLError
from .manybody import SpinChainConfig, reduced_trajectory, variance_qfi_chain
from .nonhermitian import PTQubitParams, nh_trajectory, pt_hamiltonian, split_hermitian
from .qsl import Trajectory, bound_profile, normalize_series

MANIFEST_NAME = "manifest.ini"

HEADERS = {
    "qsl": "alpha,mu,tau,tau_qsl,flag_loose",
    "delta": "alpha,mu,tau,delta,flag_loose",
    "delta_normalized": "alpha,mu,tau,delta_normalized,flag_loose",
    "kappa_min": "tau,kappa_min",
    "entropy_series": "t,alpha,mu,entropy,alpha_purity",
}
SUFFIX = {
    "qsl": "tau_qsl",
    "delta": "delta",
    "delta_normalized": "delta_normalized",
    "kappa_min": "kappa_min",
    "entropy_series": "entropy",
}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class Curve:
    """Bound quantities of one ``(alpha, mu)`` over the time grid."""

    alpha: float
    mu: float
    tau_qsl: np.ndarray
    delta: np.ndarray
    loose: np.ndarray
    entropy: np.ndarray
    purity: np.ndarray


@dataclass
class Case:
    name: str
    traj: Trajectory
    curves: list[Curve] = field(default_factory=list)


@dataclass
class RunResult:
    out_dir: Path
    files: list[Path]
    manifest: Path
    checksums: dict[str, str]
    any_loose: bool


# ---------------------------------------------------------------------------
# parameter helpers


def _entropy_grid(cfg: ScenarioConfig) -> list[EntropyParams]:
    grid = []
    for a in cfg.alphas:
        if not 0 < a < 1:
            raise ConfigError(f"entropy.alpha: bound scenarios need 0 < alpha < 1, got {a}")
        for m in cfg.mus:
            if not 0 <= m <= 1:
                raise ConfigError(f"entropy.mu: bound scenarios need 0 <= mu <= 1, got {m}")
            grid.append(EntropyParams.of(a, m))
    return grid


def _key(cfg: ScenarioConfig, name: str) -> str:
    return f"scenario.{cfg.scenario}.{name}"


def _float(cfg: ScenarioConfig, name: str, default: str | None = None) -> float:
    return as_float(_key(cfg, name), cfg.param(name, default))


def _bloch(cfg: ScenarioConfig) -> la.BlochParams:
    try:
        return la.BlochParams(
            _float(cfg, "r", "0.5"), _float(cfg, "theta", repr(math.pi / 4)), _float(cfg, "phi", repr(math.pi / 4))
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{_key(cfg, 'r')}/theta/phi: {exc}") from None


def _literal_matrix(cfg: ScenarioConfig, name: str) -> np.ndarray:
    raw = cfg.param(name)
    try:
        return np.array(ast.literal_eval(raw), dtype=complex)
    except (ValueError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"{_key(cfg, name)}: not a literal matrix ({exc})") from None


def _initial_state(cfg: ScenarioConfig, dim: int) -> np.ndarray:
    if "rho0" in cfg.params:
        rho = _literal_matrix(cfg, "rho0")
        try:
            rho = la.validate_density(rho)
        except UQSLError as exc:
            raise ConfigError(f"{_key(cfg, 'rho0')}: {exc}") from None
    elif dim == 2:
        rho = la.from_bloch(_bloch(cfg))
    else:
        raise ConfigError(f"{_key(cfg, 'rho0')}: required for dimension {dim}")
    if rho.shape != (dim, dim):
        raise ConfigError(f"{_key(cfg, 'rho0')}: shape {rho.shape} does not match dimension {dim}")
    return rho


def _times(cfg: ScenarioConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max, cfg.n_points)


def _case_label(x: float) -> str:
    return format(x, "g")


# ---------------------------------------------------------------------------
# building cases


def _curves(traj: Trajectory, grid: list[EntropyParams], pool: ThreadPoolExecutor, closed_form=None) -> list[Curve]:
    def one(e: EntropyParams) -> Curve:
        prof = bound_profile(traj, e)
        tau_qsl = prof.tau_qsl
        if closed_form is not None:
            tau_qsl = closed_form(e)
        spectra = np.where(traj.spectra <= 1e-14, 0.0, traj.spectra)
        purity = np.array([purity_from_spectrum(p, e.alpha) for p in spectra])
        return Curve(e.alpha, e.mu, tau_qsl, prof.delta, prof.loose, prof.entropy, purity)

    return list(pool.map(one, grid))


def _amplitude_damping_cases(cfg, grid, pool) -> list[Case]:
    gamma = _float(cfg, "gamma", "1.0")
    try:
        p = AmplitudeDampingParams(gamma, _bloch(cfg))
    except ValueError as exc:
        raise ConfigError(f"{_key(cfg, 'gamma')}: {exc}") from None
    times = _times(cfg)
    traj = channel_trajectory(amplitude_damping(p), la.from_bloch(p.bloch), times)

    def closed(e):
        return ad_qsl_closed_form_profile(p, cfg.t_max, times, e)[1]

    return [Case("amplitude_damping", traj, _curves(traj, grid, pool, closed))]


def _pt_qubit_cases(cfg, grid, pool) -> list[Case]:
    varpi = _float(cfg, "varpi", "1.0")
    ratios = as_float_list(_key(cfg, "eta_over_varpi"), cfg.param("eta_over_varpi", "0.5, 1, 2"))
    bloch = _bloch(cfg)
    rho0 = la.from_bloch(bloch)
    times = _times(cfg)
    cases = []
    for ratio in ratios:
        try:
            p = PTQubitParams(varpi, ratio * varpi, bloch)
        except ValueError as exc:
            raise ConfigError(f"{_key(cfg, 'eta_over_varpi')}: {exc}") from None
        traj = nh_trajectory(split_hermitian(pt_hamiltonian(p)), rho0, times)
        cases.append(Case(f"pt_qubit_eta{_case_label(ratio)}", traj, _curves(traj, grid, pool)))
    return cases


def _xxz_cases(cfg, grid, pool) -> list[Case]:
    Ls = as_int_list(_key(cfg, "L"), cfg.param("L", "2"))
    J = _float(cfg, "J", "1.0")
    Delta = _float(cfg, "Delta", "0.5")
    p = _float(cfg, "p", "0.5")
    L_A = as_int(_key(cfg, "L_A"), cfg.param("L_A", "1"))
    times = _times(cfg)
    cases = []
    for L in Ls:
        try:
            chain = SpinChainConfig(L, J, Delta, p, L_A)
        except ValueError as exc:
            raise ConfigError(f"{_key(cfg, 'L')}: {exc}") from None
        variance = variance_qfi_chain(chain)[0]
        traj = reduced_trajectory(chain, times, speed_bound=2 * math.sqrt(max(variance, 0.0)))
        cases.append(Case(f"xxz_L{L}", traj, _curves(traj, grid, pool)))
    return cases


def _custom_channel_cases(cfg, grid, pool) -> list[Case]:
    target = cfg.param("factory")
    module_name, _, fn_name = target.partition(":")
    if not fn_name:
        raise ConfigError(f"{_key(cfg, 'factory')}: expected 'module:function', got '{target}'")
    try:
        factory = getattr(importlib.import_module(module_name), fn_name)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"{_key(cfg, 'factory')}: {exc}") from None
    try:
        kwargs = ast.literal_eval(cfg.param("kwargs", "{}"))
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"{_key(cfg, 'kwargs')}: {exc}") from None
    if not isinstance(kwargs, dict):
        raise ConfigError(f"{_key(cfg, 'kwargs')}: expected a dict literal")
    ch = factory(**kwargs)
    if not isinstance(ch, KrausChannel):
        raise ConfigError(f"{_key(cfg, 'factory')}: factory did not return a KrausChannel")
    rho0 = _initial_state(cfg, ch.dim)
    traj = channel_trajectory(ch, rho0, _times(cfg))
    return [Case(f"custom_channel_{ch.name}", traj, _curves(traj, grid, pool))]


def _custom_nonhermitian_cases(cfg, grid, pool) -> list[Case]:
    Ht = _literal_matrix(cfg, "h_tilde")
    try:
        nh = split_hermitian(Ht)
    except UQSLError as exc:
        raise ConfigError(f"{_key(cfg, 'h_tilde')}: {exc}") from None
    rho0 = _initial_state(cfg, nh.dim)
    traj = nh_trajectory(nh, rho0, _times(cfg))
    return [Case("custom_nonhermitian", traj, _curves(traj, grid, pool))]


BUILDERS = {
    "amplitude_damping": _amplitude_damping_cases,
    "pt_qubit": _pt_qubit_cases,
    "xxz": _xxz_cases,
    "custom_channel": _custom_channel_cases,
    "custom_nonhermitian": _custom_nonhermitian_cases,
}


# ---------------------------------------------------------------------------
# emission


def emit_csv(path: Path, header: str, rows) -> Path:
    """Write a header plus rows (already formatted strings) as UTF-8 CSV with LF endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header.split(","))
        w.writerows(rows)
    return path


def _rows(case: Case, what: str):
    times = case.traj.times
    if what == "kappa_min":
        for t, k in zip(times, case.traj.kappa):
            yield [fmt(t), fmt(k)]
        return
    for c in case.curves:
        if what == "entropy_series":
            for t, e, f in zip(times, c.entropy, c.purity):
                yield [fmt(t), fmt(c.alpha), fmt(c.mu), fmt(e), fmt(f)]
            continue
        # the bound is undefined on the empty prefix tau = 0
        sl = slice(1, None)
        if what == "qsl":
            values = c.tau_qsl[sl]
        elif what == "delta":
            values = c.delta[sl]
        else:
            values = normalize_series(c.delta[sl])
        for t, v, fl in zip(times[sl], values, c.loose[sl]):
            yield [fmt(c.alpha), fmt(c.mu), fmt(t), fmt(v), fmt(fl)]


def _phase_diagram(cfg: ScenarioConfig, out: Path) -> list[Path]:
    """``[f_alpha(rho)]^(mu - 1)`` against 1 over a seeded family of random states."""
    n_states = as_int(_key(cfg, "n_states"), cfg.param("n_states", "50"))
    dims = as_int_list(_key(cfg, "dims"), cfg.param("dims", "2, 3, 4"))
    seed = as_int(_key(cfg, "seed"), cfg.param("seed", "0"))
    rng = np.random.default_rng(seed)
    states = [(d, la.random_density(d, rng)) for d in dims for _ in range(n_states)]
    spectra = [(d, np.clip(la.eigenvalues(rho), 0, None)) for d, rho in states]
    rows = []
    for a in cfg.alphas:
        for m in cfg.mus:
            for i, (d, p) in enumerate(spectra):
                f = purity_from_spectrum(p, a)
                g = f ** (m - 1)
                region = 0 if abs(g - 1) <= 1e-12 else (1 if g > 1 else -1)
                rows.append([fmt(a), fmt(m), fmt(d), fmt(i), fmt(f), fmt(g), fmt(region)])
    path = out / "phase_diagram.csv"
    emit_csv(path, "alpha,mu,dim,state,f_alpha,f_pow_mu_minus_1,region", rows)
    return [path]


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None, threads: int = 1) -> RunResult:
    """Run one scenario and write its CSVs and manifest into ``out_dir``.

    Raises:
        ConfigError: for bad scenario parameters.
        SingularState: in strict mode, when any emitted value carries
            ``flag_loose = 1``.
        OSError: if the output directory cannot be written.
    """
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    cfg.out_dir = str(out)
    any_loose = False
    if cfg.scenario == "phase_diagram":
        out.mkdir(parents=True, exist_ok=True)
        files = _phase_diagram(cfg, out)
    else:
        grid = _entropy_grid(cfg)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            cases = BUILDERS[cfg.scenario](cfg, grid, pool)
        any_loose = any(c.loose[1:].any() for case in cases for c in case.curves)
        if cfg.strict and any_loose:
            raise SingularState("kappa_min reached the floor along a trajectory (strict mode)")
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for case in cases:
            for what in HEADERS:
                if cfg.emit.get(what):
                    path = out / f"{case.name}_{SUFFIX[what]}.csv"
                    files.append(emit_csv(path, HEADERS[what], _rows(case, what)))
    checksums = {p.name: sha256(p) for p in files}
    flat = cfg.to_flat()
    flat["manifest.library_version"] = __version__
    flat["manifest.wall_time_s"] = format(time.perf_counter() - start, ".3f")
    flat["manifest.threads"] = str(threads)
    flat["result.files"] = ", ".join(p.name for p in files)
    flat["result.any_loose"] = str(any_loose).lower()
    for name, digest in checksums.items():
        flat[f"result.checksums.{name}"] = digest
    manifest = out / MANIFEST_NAME
    manifest.write_text(write_flat(flat), encoding="utf-8")
    return RunResult(out, files, manifest, checksums, any_loose)


def verify_checksums(manifest: Path) -> dict[str, bool]:
    """Recompute the SHA-256 of every file listed in a manifest."""
    from .config import read_flat

    flat = read_flat(manifest.read_text(encoding="utf-8"))
    prefix = "result.checksums."
    out = {}
    for key, digest in flat.items():
        if key.startswith(prefix):
            name = key[len(prefix):]
            out[name] = sha256(manifest.parent / name) == digest
    return out
