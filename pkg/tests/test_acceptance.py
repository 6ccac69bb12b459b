"""Acceptance checks, one test per criterion.

Each test prints a single ``CRITERION k: PASS|FAIL`` line with the measured
numbers and then asserts the same verdict, so ``pytest -v`` shows both the
summary lines and the per-test outcome.  Tolerances and runtime budgets are
fixed here and are not tuned to the results.
"""
from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from sapkit.analysis import (
    bandwidths,
    chirp_direction_comparison,
    detuning_grid,
    freq_shift_scan,
    params_on_axis,
    rabi_error_scan,
    scaling_study,
    threshold_boundary,
)
from sapkit.cli import run
from sapkit.dynamics import SolverOptions, compact_batch, evolve_compact_sap2, propagate_batch
from sapkit.optimizer import Objective, optimize
from sapkit.oracles import landau_zener_asymptotic, landau_zener_finite, rabi_fidelity
from sapkit.pulse import (
    HshParams,
    LinearChirp,
    build_sap,
    chirp_phase,
    chirp_span,
    hsh_chirp,
    hsh_envelope,
)
from sapkit.suture import leibniz_tail_bound, phi_numeric, phi_series

from conftest import random_params, random_sample

CACHE = Path(__file__).resolve().parent.parent / ".sapkit-cache"

PROFILE_A = HshParams(4.0, 0.5, 2.0, 2.0, 1.0, 4.0)
PROFILE_B = HshParams.from_duration(2.0, 0.35, 1.2, 0.7, 1.0, 6.0)
RABI_BASE = HshParams.from_duration(2.0, 0.4, 1.2, 0.6, 1.0, 6.0)  # r = 0.3 W^2, r1 = 0.15 W^2
ROBUST_FIXED = {"omega_max": 3.0, "edge_duration_t1": 0.5, "center_duration_t2": 5.0}
THRESHOLD = 0.95


@pytest.fixture
def verdict(capsys):
    """Print the criterion line straight to the terminal, then assert it."""

    def report(k: int, ok: bool, elapsed: float, budget: float, detail: str):
        within = elapsed < budget
        passed = bool(ok and within)
        line = (f"CRITERION {k}: {'PASS' if passed else 'FAIL'} "
                f"[{elapsed:.1f} s of {budget:.0f} s] {detail}")
        with capsys.disabled():
            print("\n" + line)
        assert passed, line

    return report


def robust_operating_point() -> HshParams:
    res = optimize(Objective("suture_point", band=20.0), ROBUST_FIXED, n=2, cache_dir=CACHE)
    return res.best_params


# ---------------------------------------------------------------- 1


def test_criterion_1_analytic_oracles(verdict):
    t0 = time.perf_counter()
    worst_rabi = 0.0
    for omega in (0.5, 1.0, 2.0, 3.7):
        for tau in (0.7, 1.0, 3.1, 6.0):
            f = propagate_batch(build_sap(LinearChirp(omega, 0.0, tau), 1), [0.0]).fidelity[0]
            worst_rabi = max(worst_rabi, abs(f - rabi_fidelity(omega, tau)))

    omega, v = 2.0, 4.0
    asym = landau_zener_asymptotic(omega, v)
    lines = []
    worst_lz = 0.0
    for half in (10 * omega, 20 * omega, 40 * omega):
        duration = 2 * half / v
        sim = propagate_batch(build_sap(LinearChirp(omega, v, duration), 1), [0.0]).fidelity[0]
        exact = landau_zener_finite(omega, v, duration)
        worst_lz = max(worst_lz, abs(sim - exact))
        lines.append(f"+-{half:g}: sim {sim:.6f} exact {exact:.6f} correction {exact - asym:+.4f}")
    ok = worst_rabi < 1e-8 and worst_lz < 1e-3
    verdict(1, ok, time.perf_counter() - t0, 10,
            f"rabi max err {worst_rabi:.1e}; LZ vs finite-window exact max err {worst_lz:.1e}; "
            f"asymptotic {asym:.6f}; " + "; ".join(lines))


# ---------------------------------------------------------------- 2


def test_criterion_2_multitone_equals_compact(verdict):
    t0 = time.perf_counter()
    band = 2 * chirp_span(PROFILE_A)
    grid = np.linspace(-0.75 * band, 0.75 * band, 101)
    tones = propagate_batch(build_sap(PROFILE_A, 2, attenuation=1.0), grid).fidelity
    compact = compact_batch(PROFILE_A, grid).fidelity
    err = float(np.max(np.abs(tones - compact)))
    ok = np.all(np.isfinite(tones)) and np.all(np.isfinite(compact)) and err < 1e-6
    verdict(2, ok, time.perf_counter() - t0, 60, f"max |F_tones - F_compact| = {err:.2e} on 101 points")


# ---------------------------------------------------------------- 3


def test_criterion_3_suture_series(verdict):
    t0 = time.perf_counter()
    sets = random_sample(20, 0)
    exact_err, bracket_bad, leibniz_bad, series_bad = 0.0, [], [], []
    for i, p in enumerate(sets):
        phi = phi_numeric(p, p.tau)
        exact_err = max(exact_err, abs(math.sin(phi) ** 2 - evolve_compact_sap2(p, 0.0)))

        long = phi_series(p, 4000)
        limit = 0.5 * (long.partial_sums[-1] + long.partial_sums[-2])
        ps = long.partial_sums
        if not all(min(a, b) <= limit <= max(a, b) for a, b in zip(ps[:200], ps[1:201])):
            bracket_bad.append(i)
        if not all(abs(limit - ps[N]) <= leibniz_tail_bound(long, N) for N in range(200)):
            leibniz_bad.append(i)

        s = phi_series(p)
        omitted = abs(phi_series(p, s.n_terms + 1).terms[-1])
        tol = max(omitted, 0.15 * abs(phi))
        if not abs(s.estimate - phi) <= tol:
            series_bad.append((i, abs(s.estimate - phi), tol))
    ok = exact_err < 1e-6 and not bracket_bad and not leibniz_bad and not series_bad
    detail = (f"max |sin^2 phi - F_compact| = {exact_err:.1e}; bracketing failures {bracket_bad}; "
              f"Leibniz failures {leibniz_bad}; series outside tolerance on {len(series_bad)}/20 "
              + str([(i, round(e, 4), round(t, 4)) for i, e, t in series_bad]))
    verdict(3, ok, time.perf_counter() - t0, 60, detail)


# ---------------------------------------------------------------- 4


def _scaling(base, n, axis, values, grid):
    m = scaling_study(base, n, axis, values, grid)
    return m, bandwidths(m), m.metadata["fit"]


@pytest.mark.slow
def test_criterion_4_bandwidth_doubling(verdict):
    t0 = time.perf_counter()
    taus = np.linspace(3.0, 9.0, 61)
    widest = params_on_axis(PROFILE_B, "duration", taus[-1])
    half = 0.75 * 2 * chirp_span(widest)
    grid = np.linspace(-half, half, 61)
    _, w1, fit1 = _scaling(PROFILE_B, 1, "duration", taus, grid)
    _, w2, fit2 = _scaling(PROFILE_B, 2, "duration", taus, grid)
    i6 = int(np.argmin(np.abs(taus - 6.0)))
    ratio = w2[i6] / w1[i6] if w1[i6] > 0 else float("nan")
    slope_ratio = fit2["slope"] / fit1["slope"] if fit1["slope"] else float("nan")

    omegas = np.linspace(1.0, 4.0, 61)
    widest = params_on_axis(RABI_BASE, "rabi", omegas[-1])
    half = 0.75 * 2 * chirp_span(widest)
    grid = np.linspace(-half, half, 61)
    _, _, rfit1 = _scaling(RABI_BASE, 1, "rabi", omegas, grid)
    _, _, rfit2 = _scaling(RABI_BASE, 2, "rabi", omegas, grid)

    def inside(x):
        return bool(np.isfinite(x) and 1.6 <= x <= 2.4)

    ok = inside(ratio) and inside(slope_ratio) and inside(rfit1["exponent"]) and inside(rfit2["exponent"])
    detail = (f"W(tau=6): SAP1 {w1[i6]:.3f}, SAP2 {w2[i6]:.3f}, ratio {ratio:.3f}; "
              f"dW/dtau SAP1 {fit1['slope']:.3f} ({fit1['points_used']} pts), "
              f"SAP2 {fit2['slope']:.3f} ({fit2['points_used']} pts), ratio {slope_ratio:.3f}; "
              f"rabi log-log slope SAP1 {rfit1['exponent']:.3f} ({rfit1['points_used']} pts), "
              f"SAP2 {rfit2['exponent']:.3f} ({rfit2['points_used']} pts); "
              f"SAP2 rows with F(0) >= 0.95: {int(np.count_nonzero(w2 > 0))}/61")
    verdict(4, ok, time.perf_counter() - t0, 15 * 60, detail)


# ---------------------------------------------------------------- 5


def test_criterion_5_suture_recovery(verdict):
    t0 = time.perf_counter()
    res = optimize(Objective("suture_point", band=20.0), ROBUST_FIXED, n=2)
    p = res.best_params
    f0 = propagate_batch(build_sap(p, 2), [0.0]).fidelity[0]
    ok = f0 > 0.95
    verdict(5, ok, time.perf_counter() - t0, 10 * 60,
            f"suture F = {f0:.6f} after {res.evaluations} evaluations at T={p.edge_shape_T:.4f}, "
            f"r={p.edge_rate_r:.4f}, r1={p.linear_rate_r1:.4f}")


# ---------------------------------------------------------------- 6


def test_criterion_6_chirp_direction(verdict):
    t0 = time.perf_counter()
    points = {"duration profile tau=6": PROFILE_B, "rabi profile Omega=2": params_on_axis(RABI_BASE, "rabi", 2.0)}
    ok = True
    parts = []
    for name, p in points.items():
        band = 2 * chirp_span(p)
        grid = detuning_grid(0.5 * band, omega=p.omega_max, per_omega=16)
        c = chirp_direction_comparison(p, grid)
        this = c.average_same < c.average_opposite and c.central_deficit > c.outer_deficit
        ok &= this
        parts.append(f"{name}: average opposite {c.average_opposite:.4f} same {c.average_same:.4f}; "
                     f"deficit central {c.central_deficit:.4f} outer {c.outer_deficit:.4f}")
    verdict(6, ok, time.perf_counter() - t0, 10 * 60, "; ".join(parts))


# ---------------------------------------------------------------- 7


def test_criterion_7_robustness(verdict):
    t0 = time.perf_counter()
    p = robust_operating_point()
    sap = build_sap(p, 2)
    band = sap.band_width
    grid = detuning_grid(0.5 * band, omega=p.omega_max, per_omega=16)

    rabi = rabi_error_scan(sap, grid, [-0.1, 0.0, 0.1])
    avg = rabi.metadata["band_average"]
    rabi_drop = max(avg[1] - avg[0], avg[1] - avg[2])

    shifts = np.linspace(-0.5, 0.5, 11)
    scan = freq_shift_scan(p, grid, shifts)
    bavg = np.asarray(scan.metadata["band_average"])
    suture = np.asarray(scan.metadata["suture_fidelity"])
    i0 = 5
    band_drop = float(bavg[i0] - bavg.min())
    suture_drop = float(suture[i0] - suture.min())
    separated_worse = all(bavg[i0 + k] < bavg[i0 - k] for k in range(1, 6))

    ok = rabi_drop < 0.05 and band_drop < 0.05 and suture_drop > band_drop and separated_worse
    detail = (f"operating point T={p.edge_shape_T:.4f} r={p.edge_rate_r:.4f} r1={p.linear_rate_r1:.4f}; "
              f"band averages at dW/W=-0.1,0,+0.1: {avg[0]:.4f} {avg[1]:.4f} {avg[2]:.4f} "
              f"(max drop {rabi_drop:.4f}); shift |d_f|<=0.5: band-average drop {band_drop:.4f}, "
              f"suture-point drop {suture_drop:.4f}; separated minus overlapped "
              + str([round(float(bavg[i0 + k] - bavg[i0 - k]), 4) for k in range(1, 6)]))
    verdict(7, ok, time.perf_counter() - t0, 20 * 60, detail)


# ---------------------------------------------------------------- 8


def _pulse_invariants(p: HshParams, rng: np.random.Generator) -> list[str]:
    bad = []
    t1, t2, tau = p.edge_duration_t1, p.center_duration_t2, p.tau
    jump = p.linear_rate_r1 * t2 / (2 * p.edge_shape_T)
    scale = 1 + jump + p.edge_rate_r / p.edge_shape_T + p.linear_rate_r1 / p.edge_shape_T
    for seam, target in ((t1, -jump), (t1 + t2, jump)):
        eps = 1e-9 * max(1.0, seam)
        if abs(hsh_chirp(p, seam - eps) - target) > 1e-6 * scale or \
                abs(hsh_chirp(p, seam + eps) - target) > 1e-6 * scale:
            bad.append("chirp continuity")
        if abs(hsh_envelope(p, seam - eps) - hsh_envelope(p, seam + eps)) > 1e-6 * p.omega_max * (1 + 1 / p.edge_shape_T):
            bad.append("envelope continuity")
    ts = rng.uniform(0, tau, 8)
    sym = scale * (1 + tau) * 1e-12
    if np.max(np.abs(hsh_chirp(p, tau - ts) + hsh_chirp(p, ts))) > sym:
        bad.append("chirp antisymmetry")
    if np.max(np.abs(hsh_envelope(p, tau - ts) - hsh_envelope(p, ts))) > 1e-12 * p.omega_max * (1 + tau / p.edge_shape_T):
        bad.append("envelope symmetry")
    h = 1e-5 * min(tau, p.edge_shape_T)
    tt = np.clip(ts, 2 * h, tau - 2 * h)
    fd = (chirp_phase(p, tt + h) - chirp_phase(p, tt - h)) / (2 * h)
    curv = p.edge_rate_r / p.edge_shape_T ** 2 + p.linear_rate_r1 / p.edge_shape_T
    peak = np.abs(chirp_phase(p, tt)) + np.abs(hsh_chirp(p, tt)) * tau + 1.0
    near = np.minimum(np.abs(tt - t1), np.abs(tt - t1 - t2)) < h
    tol = curv * h * h + 1e-13 * peak / h + np.where(near, curv * h, 0.0)
    if np.any(np.abs(fd - hsh_chirp(p, tt)) > 10 * tol):
        bad.append("phase derivative")
    if not chirp_span(p) > 0 or abs(chirp_span(p) - (hsh_chirp(p, tau) - hsh_chirp(p, 0.0))) > 1e-12 * chirp_span(p):
        bad.append("span")
    return bad


def test_criterion_8_property_suite(verdict, tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)

    # norm drift and adaptive versus fixed-step on 20 random configurations
    drift, worst_overlap, rejected = 0.0, 1.0, 0
    for _ in range(20):
        p = random_params(rng)
        n = int(rng.integers(1, 4))
        pulse = build_sap(p, n, phases=int(rng.integers(0, 2 ** 31)))
        deltas = rng.uniform(-0.6, 0.6, 3) * pulse.band_width
        a = propagate_batch(pulse, deltas)
        b = propagate_batch(pulse, deltas, SolverOptions(method="rk4", rk4_steps=200_000))
        rejected += int(np.count_nonzero(~a.ok))
        drift = max(drift, float(np.max(a.norm_drift[a.ok], initial=0.0)))
        ov = np.abs(np.conj(a.amp_e) * b.amp_e + np.conj(a.amp_s) * b.amp_s) ** 2
        worst_overlap = min(worst_overlap, float(np.min(ov)))

    # mirror symmetry of symmetric two-tone maps
    asym = 0.0
    for p in (PROFILE_A, PROFILE_B):
        pulse = build_sap(p, 2, attenuation=1.0)
        g = np.linspace(0.0, 0.75 * pulse.band_width, 51)
        plus = propagate_batch(pulse, g).fidelity
        minus = propagate_batch(pulse, -g).fidelity
        asym = max(asym, float(np.max(np.abs(plus - minus))))

    # determinism through the command line
    cfg = {"pulse": {"omega_max": 2.0, "edge_shape_T": 0.35, "edge_rate_r": 1.2, "linear_rate_r1": 0.7,
                     "edge_duration_t1": 1.0, "tau": 6.0, "n": 2, "phases": "random"},
           "grid": {"delta": {"min": -8.0, "max": 8.0, "points": 33}}}
    path = tmp_path / "job.json"
    path.write_text(json.dumps(cfg))
    codes = [run(["sweep", "--config", str(path), "--seed", "5", "--out", str(tmp_path / d)]) for d in "ab"]
    identical = codes == [0, 0] and all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        for f in ("result.csv", "result.json"))

    # pulse-core invariants on 1000 random parameter sets
    prng = np.random.default_rng(1000)
    broken = {}
    for p in random_sample(1000, 77):
        for b in _pulse_invariants(p, prng):
            broken[b] = broken.get(b, 0) + 1

    ok = drift < 1e-6 and worst_overlap >= 1 - 1e-8 and asym < 1e-6 and identical and not broken
    detail = (f"max norm drift {drift:.1e} ({rejected} rejected); min overlap adaptive vs RK4 "
              f"1-{1 - worst_overlap:.1e}; max |F(d)-F(-d)| {asym:.1e}; byte-identical reruns {identical}; "
              f"pulse invariant violations {broken or 'none'} on 1000 sets")
    verdict(8, ok, time.perf_counter() - t0, 5 * 60, detail)


# ---------------------------------------------------------------- 9


@pytest.mark.slow
def test_criterion_9_boundary_ordering(verdict):
    t0 = time.perf_counter()
    taus = np.linspace(3.0, 7.0, 5)
    widths = np.array([2.0, 4.0, 7.0, 10.0, 15.0, 20.0, 30.0, 45.0])
    t1, omega = 0.5, 3.0
    per_omega = 4.0

    def boundary(n):
        def cell(tau, w):
            fixed = {"omega_max": omega, "edge_duration_t1": t1, "center_duration_t2": tau - 2 * t1}
            res = optimize(Objective("band_average", band=w, per_omega=per_omega), fixed, n=n,
                           coarse_points=5, budget=65, cache_dir=CACHE)
            sap = build_sap(res.best_params, n)
            return sap, detuning_grid(0.5 * sap.band_width, omega=omega, per_omega=per_omega)

        return threshold_boundary(taus, widths, cell, THRESHOLD)

    b1, b3 = boundary(1), boundary(3)

    def edge(b, i):
        # first crossing; a row entirely above threshold puts the edge past the grid,
        # a row entirely below puts it before the grid
        x = b.points[i][1]
        if x is not None:
            return x
        row = b.grid[i]
        return math.inf if np.nanmin(row) >= THRESHOLD else -math.inf

    e1 = [edge(b1, i) for i in range(taus.size)]
    e3 = [edge(b3, i) for i in range(taus.size)]
    ok = all(y > x for x, y in zip(e1, e3))
    rows = "; ".join(
        f"tau={t:g}: W* SAP1 {x:.2f} SAP3 {y:.2f} "
        f"(F SAP1 {np.round(b1.grid[i], 3).tolist()} SAP3 {np.round(b3.grid[i], 3).tolist()})"
        for i, (t, x, y) in enumerate(zip(taus, e1, e3)))
    verdict(9, ok, time.perf_counter() - t0, 30 * 60, f"W grid {widths.tolist()}; {rows}")
