"""Acceptance suite.

Every criterion runs at seed 0 and prints one ``PASS``/``FAIL`` line, which
``conftest.py`` repeats in the terminal summary. Run directly with
``python3 tests/test_acceptance.py`` or through pytest.
"""
import math
import sys
import time

import numpy as np
import pytest

from hopfsync.analysis import (
    PhaseSeries,
    abs_crp_difference,
    circular_stats,
    density_mode,
    mean_phase_coherence,
    sync_index,
)
from hopfsync.bifurcation import find_hopf_points, stable_orbit_amplitude
from hopfsync.integrator import SimConfig, advance_deterministic, integrate, trial_streams, wiener_increments
from hopfsync.model import ModelParams, drift, jacobian_origin
from hopfsync.sweep import SweepAxis, SweepGrid, mean_density, nested_optima, snr_curve, sweep

SEED = 0
SIM = SimConfig(seed=SEED)
CR_BASE = ModelParams(lambda0=-0.5, d1=0.3, d2=0.01, delta1=0.05)
CR_AXIS = SweepAxis.span("delta2", 0.01, 5.0, 15, "log")
REPORT = []


def report(number, ok, detail, elapsed, limit):
    within = elapsed < limit
    line = f"[{'PASS' if ok and within else 'FAIL'}] criterion {number}: {detail} ({elapsed:.1f} s, limit {limit:g} s)"
    REPORT.append(line)
    print(line)
    assert within, f"criterion {number} exceeded its runtime limit"
    assert ok, line


def cr_sweep():
    # shared by criteria 4 and 5
    if not hasattr(cr_sweep, "res"):
        t0 = time.perf_counter()
        cr_sweep.res = sweep(SweepGrid((CR_AXIS,), CR_BASE, SIM, 50))
        cr_sweep.elapsed = time.perf_counter() - t0
    return cr_sweep.res, cr_sweep.elapsed


def test_c1_hopf_points():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for d1, d2 in rng.uniform(0.0, 0.3, (100, 2)):
        pts = find_hopf_points(ModelParams(d1=d1, d2=d2))
        worst = max(worst, abs(pts[0]), abs(pts[-1] - (d1 + d2)), float(len(pts) != 2))
    sym = find_hopf_points(ModelParams(d1=0.05, d2=0.05))
    worst = max(worst, abs(sym[-1] - 0.1))
    report(1, worst < 1e-9, f"max Hopf-point error {worst:.2e}; symmetric d=0.05 gives HB2={sym[-1]:.12f}",
           time.perf_counter() - t0, 1.0)


def test_c2_limit_cycle_amplitude():
    t0 = time.perf_counter()
    r_star = math.sqrt((-1 + math.sqrt(5)) / 2)
    r1, r2 = stable_orbit_amplitude(ModelParams(), 0.2)
    state = np.array([1.0, 0.0, 1.0, 0.0])
    advance_deterministic(state, ModelParams(lambda0=-0.5), 5e-3, 20000, method="rk4")
    decayed = max(math.hypot(state[0], state[1]), math.hypot(state[2], state[3]))
    ok = abs(r1 - r_star) <= 0.01 * r_star and abs(r2 - r_star) <= 0.01 * r_star and decayed < 1e-6
    report(2, ok, f"r={r1:.6f} vs {r_star:.6f}; amplitude at t=100 for lambda0=-0.5 is {decayed:.2e}",
           time.perf_counter() - t0, 5.0)


def test_c3_snr_curve():
    t0 = time.perf_counter()
    deltas = np.geomspace(0.01, 5.0, 15)
    rows = snr_curve(deltas, ModelParams(lambda0=-0.5), SIM, 20)
    beta = np.array([np.nan if b is None else b for _, b in rows])
    k = int(np.nanargmax(beta))
    finite = np.all(np.isfinite(beta))
    unimodal = finite and np.all(np.diff(beta[: k + 1]) > 0) and np.all(np.diff(beta[k:]) < 0)
    ok = bool(unimodal and 0.5 <= deltas[k] <= 2.0 and beta[0] < 0.2 * beta[k])
    breaks = [f"{deltas[i]:.3g}" for i in range(14) if (beta[i + 1] > beta[i]) != (i < k)]
    report(3, ok, f"argmax delta={deltas[k]:.3f}, beta(0.01)/peak={beta[0] / beta[k]:.3f}, "
           f"unimodal={bool(unimodal)} (monotonicity breaks after delta={breaks})",
           time.perf_counter() - t0, 120.0)


def test_c4_coherence_resonance():
    res, elapsed = cr_sweep()
    d = res.array()
    r = res.array("R")
    k = int(np.argmin(d))
    kr = int(np.argmax(r))
    ok = d[k] <= 0.75 * d[0] and d[k] <= 0.75 * d[-1] and 0.3 <= CR_AXIS.values[k] <= 2.0 and abs(kr - k) <= 1
    report(4, ok, f"min |dphi|={d[k]:.3f} at delta2={CR_AXIS.values[k]:.3f}; endpoints {d[0]:.3f}, {d[-1]:.3f}; "
           f"R argmax at index {kr} vs {k}", elapsed, 300.0)


def test_c5_density_narrowing():
    res, _ = cr_sweep()
    t0 = time.perf_counter()
    best = CR_AXIS.values[int(np.argmin(res.array()))]
    stats = {}
    for d2 in (best, 0.05, 3.0):
        dens = mean_density(CR_BASE.replace(delta2=d2), SIM, 10)
        stats[d2] = (abs(density_mode(dens)), circular_stats(dens)[1])
    ok = all(stats[best][0] < stats[o][0] and stats[best][1] < stats[o][1] for o in (0.05, 3.0))
    desc = "; ".join(f"delta2={k:.3g}: |mode|={v[0]:.3f}, circ std={v[1]:.3f}" for k, v in stats.items())
    report(5, ok, desc, time.perf_counter() - t0, 300.0)


def test_c6_lambda_dependence():
    t0 = time.perf_counter()
    lams = (-0.03, -0.5, -1.0)
    axis = SweepAxis.span("delta2", 0.01, 5.0, 15, "log")
    axis = SweepAxis("delta2", tuple(sorted(set(axis.values) | {0.1})), "log")
    base = ModelParams(d1=0.3, d2=0.01, delta1=0.1)
    curves = {}
    for lam in lams:
        curves[lam] = sweep(SweepGrid((axis,), base.replace(lambda0=lam), SIM, 30)).array()
    i = axis.values.index(0.1)
    at = [curves[lam][i] for lam in lams]
    mins = {lam: float(np.min(c)) for lam, c in curves.items()}
    ok = at[0] < at[1] < at[2] and mins[-0.03] < mins[-1.0]
    report(6, ok, f"|dphi| at delta2=0.1: {[round(float(v), 3) for v in at]}; minima {mins[-0.03]:.3f} (-0.03) "
           f"vs {mins[-1.0]:.3f} (-1)", time.perf_counter() - t0, 600.0)


def test_c7_ratio_inversion():
    t0 = time.perf_counter()
    ds = (0.01, 0.08, 0.155, 0.23, 0.3)
    inner = [SweepAxis.span("delta1", 0.01, 0.3, 9, "log"), SweepAxis.span("delta2", 0.01, 0.3, 9, "log")]
    rows = nested_optima([SweepAxis("d1", ds), SweepAxis("d2", ds)], inner, ModelParams(lambda0=-0.5), SIM, 30)
    wrong, on_diag = [], []
    for values, rep, err in rows:
        if rep is None:
            wrong.append((values, err))
            continue
        ratio = rep.optimal_noise_ratio
        if rep.argmin["delta1"] == rep.argmin["delta2"]:
            on_diag.append(values)
        if values["d1"] > values["d2"] and not ratio < 1:
            wrong.append(values)
        elif values["d1"] < values["d2"] and not ratio > 1:
            wrong.append(values)
    ok = len(wrong) <= 2 and not on_diag
    report(7, ok, f"{len(wrong)}/20 off-diagonal cells on the wrong side; {len(on_diag)} argmin on delta1=delta2",
           time.perf_counter() - t0, 1800.0)


def test_c8_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    failures = []

    for _ in range(1000):
        n = int(rng.integers(1, 200))
        ps = PhaseSeries(0.0, 0.01, rng.uniform(0, 2 * math.pi, (2, n)))
        a, r, rho = abs_crp_difference(ps), mean_phase_coherence(ps), sync_index(ps)
        if not (0 <= a <= math.pi and 0 <= r <= 1 + 1e-12 and 0 <= rho <= 1 + 1e-12):
            failures.append("metric bounds")
            break

    h = 1e-6
    for _ in range(50):
        p = ModelParams(lambda0=rng.uniform(-1, 1), omega1=rng.uniform(-0.5, 0.5),
                        d1=rng.uniform(0, 0.3), d2=rng.uniform(0, 0.3))
        jac = jacobian_origin(p)
        fd = np.column_stack([(drift(e, p) - drift(-e, p)) / (2 * h) for e in np.eye(4) * h])
        if not np.allclose(jac, fd, atol=1e-6):
            failures.append("jacobian")
        lam, om, s = p.lambda0, p.omega0, p.d1 + p.d2
        expect = np.sort_complex(np.array([lam + 1j * om, lam - 1j * om, lam - s + 1j * om, lam - s - 1j * om]))
        if not np.allclose(np.sort_complex(np.linalg.eigvals(jac)), expect, atol=1e-9):
            failures.append("eigenvalues")
        x = rng.uniform(-2, 2, 4)
        if not np.array_equal(drift(x[[2, 3, 0, 1]], p.swapped()), drift(x, p)[[2, 3, 0, 1]]):
            failures.append("drift exchange")

    p = ModelParams(lambda0=-0.5, d1=0.3, d2=0.01, delta1=0.05, delta2=0.7)
    s1, s2 = trial_streams(SEED, 3)
    a = integrate(p, SIM, (s1, s2)).samples
    b = integrate(p.swapped(), SIM, trial_streams(SEED, 3)[::-1]).samples
    if not np.array_equal(a, b[:, [2, 3, 0, 1]]):
        failures.append("trajectory exchange")

    short = SimConfig(t_end=40.0, seed=SEED)
    grid = SweepGrid((SweepAxis("delta1", (0.05, 0.3)), SweepAxis("delta2", (0.02, 0.4, 2.0))), CR_BASE, short, 3)
    swapped = SweepGrid((SweepAxis("delta1", (0.02, 0.4, 2.0)), SweepAxis("delta2", (0.05, 0.3))),
                        CR_BASE.swapped(), short, 3, swap_streams=True)
    one, many, mirror = sweep(grid, workers=1), sweep(grid, workers=4), sweep(swapped)
    for m in ("abs_dphi", "R", "rho"):
        if not np.array_equal(one.array(m), many.array(m)):
            failures.append(f"thread determinism ({m})")
        if not np.array_equal(one.array(m), mirror.array(m).T):
            failures.append(f"heat-map exchange ({m})")

    w = wiener_increments(trial_streams(SEED, 0), 200_000)
    se = 1 / math.sqrt(w.shape[0])
    if np.any(np.abs(w.mean(axis=0)) > 5 * se) or np.any(np.abs(w.var(axis=0) - 1) > 5 * math.sqrt(2) * se):
        failures.append("wiener moments")
    if abs(np.corrcoef(w.T)[0, 1]) > 5 * se:
        failures.append("wiener independence")

    report(8, not failures, "all property checks hold" if not failures else f"failed: {sorted(set(failures))}",
           time.perf_counter() - t0, 120.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
