"""Acceptance criteria 1-10, each printed as one PASS/FAIL line."""

import math
import time
from pathlib import Path

import numpy as np
import scipy.linalg

from uqsl import linalg as la
from uqsl.channels import (
    AmplitudeDampingParams,
    ad_kappa_min,
    ad_qsl_closed_form_profile,
    amplitude_damping,
    channel_profile,
    channel_trajectory,
    evolve_channel,
)
from uqsl.config import load_config
from uqsl.entropy import (
    EntropyParams,
    alpha_purity,
    alpha_purity_quadrature_oracle,
    property_battery,
    unified_entropy,
)
from uqsl.manybody import (
    SpinChainConfig,
    energy_variance,
    mb_profile,
    neel_mixed_state,
    reduced_trajectory,
    variance_qfi_chain,
    xxz_hamiltonian,
    xxz_variance_closed_form,
)
from uqsl.nonhermitian import (
    PTQubitParams,
    equation_of_motion_residual,
    kappa_min_profile,
    nh_trajectory,
    pt_closed_form,
    pt_hamiltonian,
    pt_trajectory,
    split_hermitian,
)
from uqsl.qsl import bound_profile, entropy_rate_check, normalize_series
from uqsl.scenarios import run_scenario

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
REF_BLOCH = la.BlochParams(0.5, math.pi / 4, math.pi / 4)
GRID_5x5 = [0.1, 0.3, 0.5, 0.7, 0.9]


def test_criterion_01_entropy_correctness(criterion):
    rng = np.random.default_rng(1)
    alphas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 2.0, 3.0]
    start = time.perf_counter()
    worst_purity = 0.0
    worst_limit = 0.0
    for _ in range(500):
        rho = la.random_density(int(rng.integers(2, 9)), rng)
        for a in alphas:
            worst_purity = max(worst_purity, abs(alpha_purity(rho, a) - alpha_purity_quadrature_oracle(rho, a)))
        # mu -> 0 against the Renyi branch, alpha -> 1 against von Neumann
        for a in (0.5, 2.0):
            near = unified_entropy(rho, EntropyParams.of(a, 1e-8))
            worst_limit = max(worst_limit, abs(near - unified_entropy(rho, EntropyParams.of(a, 0.0))))
        for a in (1 - 1e-8, 1 + 1e-8):
            near = unified_entropy(rho, EntropyParams.of(a, 0.5))
            worst_limit = max(worst_limit, abs(near - unified_entropy(rho, EntropyParams.of(1.0, 0.5))))
    elapsed = time.perf_counter() - start
    ok = worst_purity < 1e-6 and worst_limit < 1e-6 and elapsed < 30
    criterion(1, ok, f"purity err {worst_purity:.1e}, limit err {worst_limit:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_property_battery(criterion):
    rng = np.random.default_rng(2)
    bad = []
    checked = 0
    for alpha, mu in [(0.2, 0.0), (0.5, 0.5), (0.8, 1.0), (1.0, 0.5), (2.0, 1.0), (3.0, 0.3)]:
        report = property_battery(EntropyParams.of(alpha, mu), rng, n_instances=200)
        checked += sum(c.n_checked for c in report.checks)
        bad += [f"{c.name}@({alpha},{mu})" for c in report.checks if not c.passed]
    ok = not bad
    criterion(2, ok, f"{checked} checks, violations: {', '.join(bad) or 'none'}")
    assert ok


def _prefix_violations(prof_fine, prof_coarse):
    """Prefixes where lhs > rhs + 1e-6 + grid-halving difference of rhs."""
    fine_rhs = prof_fine.rhs[::2]
    finite = np.isfinite(fine_rhs) & np.isfinite(prof_coarse.rhs)
    disc = np.zeros_like(fine_rhs)
    disc[finite] = np.abs(fine_rhs[finite] - prof_coarse.rhs[finite])
    slack = 1e-6 + disc
    return int(np.sum(prof_fine.lhs[::2] > prof_fine.rhs[::2] + slack))


def test_criterion_03_core_inequality(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    params = [EntropyParams.of(a, m) for a in GRID_5x5 for m in GRID_5x5]
    trajectories = []
    for _ in range(10):
        b = la.BlochParams(float(rng.uniform(0, 0.95)), float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi)))
        ch = amplitude_damping(AmplitudeDampingParams(1.0, b))
        rho0 = la.from_bloch(b)
        trajectories.append(
            (channel_trajectory(ch, rho0, np.linspace(0, 6, 401), True), channel_trajectory(ch, rho0, np.linspace(0, 6, 201), True))
        )
    for eta in (0.5, 1.0, 2.0):
        nh = split_hermitian(pt_hamiltonian(PTQubitParams(1.0, eta, REF_BLOCH)))
        rho0 = la.from_bloch(REF_BLOCH)
        trajectories.append(
            (nh_trajectory(nh, rho0, np.linspace(0, 5, 401), True), nh_trajectory(nh, rho0, np.linspace(0, 5, 201), True))
        )
    for L in (2, 4):
        for p in (0.25, 0.5):
            cfg = SpinChainConfig(L, J=1.0, Delta=0.5, p=p)
            trajectories.append((reduced_trajectory(cfg, np.linspace(0, 5, 401)), reduced_trajectory(cfg, np.linspace(0, 5, 201))))
    violations = 0
    for fine, coarse in trajectories:
        for p in params:
            violations += _prefix_violations(bound_profile(fine, p), bound_profile(coarse, p))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 300
    criterion(3, ok, f"{len(trajectories)} trajectories x {len(params)} (alpha,mu): {violations} violations, {elapsed:.1f}s")
    assert ok


def test_criterion_04_amplitude_damping_closed_forms(criterion):
    p = AmplitudeDampingParams(1.0, REF_BLOCH)
    rho0 = la.from_bloch(REF_BLOCH)
    ch = amplitude_damping(p)
    ts = np.linspace(0, 10, 201)
    kappa_err = max(abs(ad_kappa_min(p, t) - la.kappa_min(evolve_channel(ch, rho0, t))) for t in ts)
    rel = 0.0
    for mu in (0.25, 0.5, 0.75, 1.0):
        e = EntropyParams.of(0.5, mu)
        generic = channel_profile(ch, rho0, 6.0, 200, e).tau_qsl[1:]
        closed = ad_qsl_closed_form_profile(p, 6.0, 200, e)[1][1:]
        rel = max(rel, float(np.max(np.abs(closed - generic) / np.abs(generic))))
    ok = kappa_err < 1e-10 and rel < 1e-6
    criterion(4, ok, f"kappa_min err {kappa_err:.1e}, closed-form rel diff {rel:.1e}")
    assert ok


def test_criterion_05_amplitude_damping_shape(criterion):
    p = AmplitudeDampingParams(1.0, REF_BLOCH)
    rho0 = la.from_bloch(REF_BLOCH)
    ch = amplitude_damping(p)
    failures = []
    ratios = []
    for alpha in (0.25, 0.5, 0.75):
        for mu in (0.0, 1.0):
            e = EntropyParams.of(alpha, mu)
            times, tq, _ = ad_qsl_closed_form_profile(p, 6.0, 301, e)
            tag = f"({alpha},{mu})"
            if not tq[times <= 1.0][1:].min() > 0:
                failures.append(f"{tag} zero at small tau")
            tail = tq[times > 4.0]
            if np.any(np.diff(tail) >= 0):
                failures.append(f"{tag} not decreasing after 4")
            ratio = tq[-1] / tq.max()
            ratios.append(ratio)
            if not ratio < 0.1:
                failures.append(f"{tag} tau_qsl(6)/peak={ratio:.3f}")
            dn = normalize_series(channel_profile(ch, rho0, 6.0, 301, e).delta[1:])
            if not dn[-1] > 0.95:
                failures.append(f"{tag} delta_normalized(6)={dn[-1]:.3f}")
    ok = not failures
    detail = f"tau_qsl(6)/peak in [{min(ratios):.3f}, {max(ratios):.3f}]"
    if failures:
        detail += "; " + "; ".join(failures)
    criterion(5, ok, detail)
    assert ok, detail


def test_criterion_06_pt_closed_forms(criterion):
    rho0 = la.from_bloch(REF_BLOCH)
    worst_td = 0.0
    worst_res = 0.0
    for ratio in (0.5, 1 - 1e-6, 1.0, 1 + 1e-6, 2.0):
        p = PTQubitParams(1.0, ratio, REF_BLOCH)
        Ht = pt_hamiltonian(p)
        for t in np.linspace(0, 5, 501):
            U = scipy.linalg.expm(-1j * t * Ht)
            M = U @ rho0 @ U.conj().T
            worst_td = max(worst_td, la.trace_distance(pt_closed_form(p, t), M / np.trace(M)))
        traj = pt_trajectory(p, np.linspace(0, 5, 1000))
        worst_res = max(worst_res, equation_of_motion_residual(split_hermitian(Ht), traj))
    ok = worst_td < 1e-9 and worst_res < 1e-5
    criterion(6, ok, f"max trace distance {worst_td:.1e}, max residual {worst_res:.1e}")
    assert ok


def test_criterion_07_pt_kappa_shape(criterion):
    p = PTQubitParams(1.0, 0.5, REF_BLOCH)
    T = p.period
    base = np.linspace(0, T, 101)
    k0 = kappa_min_profile(p, base)
    drift = max(float(np.max(np.abs(kappa_min_profile(p, base + n * T) - k0))) for n in (1, 2, 3))
    late = np.linspace(3, 5, 201)
    ep_max = float(kappa_min_profile(PTQubitParams(1.0, 1.0, REF_BLOCH), late).max())
    mid = np.linspace(1, 5, 401)
    below = bool(np.all(kappa_min_profile(PTQubitParams(1.0, 2.0, REF_BLOCH), mid) < kappa_min_profile(PTQubitParams(1.0, 1.0, REF_BLOCH), mid)))
    ok = drift < 1e-6 and ep_max < 1e-3 and below
    criterion(7, ok, f"period drift {drift:.1e}, EP kappa_min max on [3,5] {ep_max:.1e}, broken below EP: {below}")
    assert ok


def test_criterion_08_xxz_variance(criterion):
    start = time.perf_counter()
    worst_rel = 0.0
    chain_bad = 0
    n = 0
    for L in range(2, 7):
        for p in (0.0, 0.25, 0.5, 1.0):
            for delta in (0.0, 0.5, 1.0, 2.0):
                cfg = SpinChainConfig(L, J=1.0, Delta=delta, p=p)
                brute = energy_variance(neel_mixed_state(cfg), xxz_hamiltonian(cfg))
                closed = xxz_variance_closed_form(cfg)
                worst_rel = max(worst_rel, abs(brute - closed) / max(abs(closed), 1e-300))
                var, qfi, comm = variance_qfi_chain(cfg)
                if not (comm <= 2 * math.sqrt(qfi) + 1e-9 and 2 * math.sqrt(qfi) <= 2 * math.sqrt(var) + 1e-9):
                    chain_bad += 1
                n += 1
    elapsed = time.perf_counter() - start
    ok = worst_rel < 1e-9 and chain_bad == 0 and elapsed < 120
    criterion(8, ok, f"{n} configs: variance rel err {worst_rel:.1e}, chain violations {chain_bad}, {elapsed:.1f}s")
    assert ok


def test_criterion_09_xxz_trend(criterion):
    e = EntropyParams.of(0.5, 0.0)
    peaks = []
    rate_bad = 0
    bound_bad = 0
    for L in (2, 4, 6):
        cfg = SpinChainConfig(L, J=1.0, Delta=0.5, p=0.5, L_A=1)
        prof, (var, _, _) = mb_profile(cfg, 5.0, 501, e)
        peaks.append(float(prof.tau_qsl.max()))
        bound_bad += int(np.sum(prof.lhs > prof.rhs + 1e-9))
        fine = reduced_trajectory(cfg, np.linspace(0, 5, 5001), speed_bound=2 * math.sqrt(var))
        rate_bad += entropy_rate_check(fine, e, 2 * math.sqrt(var)).violations
    decreasing = peaks[0] > peaks[1] > peaks[2]
    ok = decreasing and rate_bad == 0 and bound_bad == 0
    criterion(9, ok, f"peaks L=2,4,6: {peaks[0]:.3e} > {peaks[1]:.3e} > {peaks[2]:.3e}: {decreasing}; "
              f"rate violations {rate_bad}, bound violations {bound_bad}")
    assert ok


def test_criterion_10_determinism(criterion, tmp_path):
    mismatched = []
    shipped = sorted(CONFIGS.glob("*.ini"))
    for path in shipped:
        cfg = load_config(path)
        a = run_scenario(cfg, tmp_path / path.stem / "a")
        b = run_scenario(cfg, tmp_path / path.stem / "b")
        same_bytes = all(
            fa.read_bytes() == fb.read_bytes() for fa, fb in zip(a.files, b.files)
        ) and [f.name for f in a.files] == [f.name for f in b.files]
        if not (same_bytes and a.checksums == b.checksums):
            mismatched.append(path.stem)
    ok = not mismatched
    criterion(10, ok, f"{len(shipped)} configs run twice, mismatches: {', '.join(mismatched) or 'none'}")
    assert ok
