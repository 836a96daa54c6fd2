"""Acceptance suite: one test per criterion, one printed verdict line each.

Run tiers
---------
``PERIDYN_ACCEPTANCE_TIER=smoke`` (default) keeps every run short: the
spatial ladders evaluate at t = 1 with dt = 1e-3 and use the relaxed rate
windows that tier defines. ``PERIDYN_ACCEPTANCE_TIER=full`` runs the
published-table configurations (t = 5, dt = 1e-4 ladders); expect ~20
minutes single-threaded.

Error metric and rate conventions
---------------------------------
Tables report the relative error exactly as the reproduced study prints
it: a ratio of squared sums (no square root). Spatial rate windows below
apply to rates of that printed quantity, whose scale matches the published
spatial tables. The temporal criterion (A6) and the discontinuous-data
criterion (A9) are checked on rates of the true norm ratio, i.e. printed
rate / 2: a second-order integrator doubles its rate in the squared
metric, and the stated windows ([1.8, 2.6], [1.0, 1.7]) are norm-scale
windows. Where an honest measurement cannot reach a stated target, the
test fails as measured; see the README's acceptance notes.
"""

import math
import os
import statistics
import time

import numpy as np
import pytest

from peridyn.experiments import (
    BenchmarkSpec,
    PenalizationSettings,
    integrator_comparison,
    jump_benchmark,
    observed_rate,
    run_benchmark,
    smooth_benchmark,
    spatial_convergence_study,
    temporal_convergence_study,
)
from peridyn.grid import (
    Field,
    Grid2D,
    build_grid,
    constant_field,
    inner_product,
    l2_norm,
    relative_l2_error,
    total_variation,
)
from peridyn.integrators import State, TimeConfig, newmark_step, stormer_verlet_step
from peridyn.operator import OperatorSpec, apply_direct, apply_spectral, jvp
from peridyn.penalization import PenalizationConfig, extend_domain, interior_window, penalized_rhs
from peridyn.presets import gaussian, linear_ramp
from peridyn.spectral import build_kernel

TIER = os.environ.get("PERIDYN_ACCEPTANCE_TIER", "smoke")
FULL = TIER == "full"

# published spatial ladder this suite reproduces (coarse to fine)
REFERENCE_SPATIAL_ERRORS = [5.1194e-1, 6.8616e-2, 1.2494e-2, 2.1966e-3]

rng = np.random.default_rng(20240517)


def report(cid: str, ok: bool, detail: str) -> bool:
    tier = "" if FULL else "[smoke]"
    print(f"[{cid}]{tier} {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def rand_field(grid, scale=1.0):
    n = grid.n_points
    return Field(grid, scale * rng.standard_normal((n, n)))


def test_a01_operator_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (8, 16, 32):
        grid = build_grid(0, 1, n)
        kernel = build_kernel(gaussian(), 0.3, grid)
        for r in (1, 3, 5):
            spec = OperatorSpec(kernel, r=r)
            for _ in range(20):
                u = rand_field(grid)
                a = apply_spectral(u, spec).values
                b = apply_direct(u, spec).values
                gap = np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))
                worst = max(worst, gap)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10.0
    assert report(
        "A1", ok, f"spectral-vs-direct max rel gap {worst:.2e} (tol 1e-10), {elapsed:.1f}s (< 10s)"
    )


def test_a02_constant_annihilation_and_odd_symmetry():
    grid = build_grid(0, 1, 16)
    kernel = build_kernel(gaussian(), 0.3, grid)
    worst_const = 0.0
    worst_odd = 0.0
    for r in (1, 3, 5):
        spec = OperatorSpec(kernel, r=r)
        for c in (0.0, 1.0, -3.5, 7.0, -11.0):
            out = apply_spectral(constant_field(grid, c), spec).values
            worst_const = max(worst_const, np.max(np.abs(out)) / max(1.0, abs(c) ** r))
        for _ in range(10):
            u = rand_field(grid)
            plus = apply_spectral(u, spec).values
            minus = apply_spectral(-1.0 * u, spec).values
            worst_odd = max(
                worst_odd, np.max(np.abs(plus + minus)) / max(1e-300, np.max(np.abs(plus)))
            )
    ok = worst_const <= 1e-12 and worst_odd <= 1e-12
    assert report(
        "A2", ok, f"constant residual {worst_const:.2e}, odd-symmetry gap {worst_odd:.2e} (tol 1e-12)"
    )


def test_a03_linearization_vs_finite_differences():
    grid = build_grid(0, 1, 16)
    spec = OperatorSpec(build_kernel(gaussian(), 0.3, grid), r=3)
    tau = 1e-6
    worst = 0.0
    for _ in range(50):
        u, h = rand_field(grid), rand_field(grid)
        up = apply_spectral(Field(grid, u.values + tau * h.values), spec).values
        dn = apply_spectral(Field(grid, u.values - tau * h.values), spec).values
        fd = (up - dn) / (2 * tau)
        an = jvp(u, h, spec).values
        worst = max(worst, np.max(np.abs(an - fd)) / np.max(np.abs(fd)))
    ok = worst <= 1e-6
    assert report("A3", ok, f"jvp vs central differences max rel err {worst:.2e} (tol 1e-6)")


def test_a04_negative_semidefiniteness_linear():
    grid = build_grid(0, 1, 16)
    spec = OperatorSpec(build_kernel(gaussian(), 0.3, grid), r=1)
    worst = 0.0
    for _ in range(200):
        w = rand_field(grid)
        q = -inner_product(apply_spectral(w, spec), w)
        worst = min(worst, q / inner_product(w, w))
    ok = worst >= -1e-12
    assert report("A4", ok, f"min quadratic form of -L: {worst:.2e} (>= -1e-12 * ||w||^2)")


def test_a05_spatial_convergence_smooth():
    bench = smooth_benchmark()
    t0 = time.perf_counter()
    if FULL:
        dt, t_eval, window, budget = 1e-4, 5.0, (2.0, 3.2), 1800.0
    else:
        dt, t_eval, window, budget = 1e-3, 1.0, (1.8, 3.4), 120.0
    table = spatial_convergence_study(bench, [5, 10, 20, 40], dt, t_eval)
    elapsed = time.perf_counter() - t0
    errors = table.errors()
    rates = table.rates()
    decreasing = all(a > b for a, b in zip(errors, errors[1:]))
    rates_ok = all(window[0] <= r <= window[1] for r in rates)
    ok = decreasing and rates_ok and elapsed < budget
    detail = (
        f"rates {[round(r, 3) for r in rates]} in {list(window)}, "
        f"errors {'decreasing' if decreasing else 'NOT decreasing'}, {elapsed:.0f}s"
    )
    if FULL:
        # row-wise comparison against the published ladder; reference
        # solutions differ, factor 3 is the stated envelope
        ratios = [p / e for p, e in zip(REFERENCE_SPATIAL_ERRORS, errors)]
        rows_ok = all(1 / 3 <= x <= 3 for x in ratios)
        detail += f"; published/measured row ratios {[round(x, 2) for x in ratios]}"
        ok = ok and rows_ok
    assert report("A5", ok, detail)


def test_a06_temporal_convergence():
    # checked on norm-scale rates (printed squared-metric rate halves);
    # the window [1.8, 2.6] is the second-order target of the scheme
    table = temporal_convergence_study(smooth_benchmark(), [0.1, 0.05, 0.025, 0.01], 64, 5.0)
    norm_rates = [r / 2 for r in table.rates()]
    ok = all(1.8 <= r <= 2.6 for r in norm_rates)
    assert report("A6", ok, f"norm-scale rates {[round(r, 3) for r in norm_rates]} in [1.8, 2.6]")


def test_a07_integrator_ordering():
    # honest measurement: the explicit scheme carries half the dispersion
    # constant of beta = 1/4, so the implicit column cannot win against a
    # converged reference; the ordering clause fails as measured
    table = integrator_comparison(smooth_benchmark(), [0.1, 0.05, 0.01], 100, 5.0)
    nm = [row.newmark_error for row in table.rows]
    sv = [row.stormer_verlet_error for row in table.rows]
    ordering = table.ordering_holds()
    nm_mono = all(a > b for a, b in zip(nm, nm[1:]))
    sv_mono = all(
        a is not None and b is not None and a > b for a, b in zip(sv, sv[1:])
    )
    detail = (
        f"newmark {[f'{x:.2e}' for x in nm]}, stormer-verlet "
        f"{[f'{x:.2e}' if x is not None else 'unstable' for x in sv]}; "
        f"ordering={'holds' if ordering else 'violated'}, columns monotone="
        f"{nm_mono and sv_mono}"
    )
    assert report("A7", ordering and nm_mono and sv_mono, detail)


def test_a08_beta0_identity():
    bench = smooth_benchmark()
    grid = build_grid(0, 1, 100)
    kernel = build_kernel(gaussian(), bench.delta, grid)
    spec = OperatorSpec(kernel, r=3)
    x1, x2 = grid.meshgrid()
    u0 = Field(grid, -0.5 * x1 - 0.5 * x2)
    v0 = Field(grid, np.zeros_like(u0.values))
    cfg = TimeConfig(1e-4, 1.0, beta=0.0)
    a = State(u0, v0, 0.0, 0)
    b = State(u0, v0, 0.0, 0)
    gap = 0.0
    for _ in range(100):
        a = newmark_step(a, spec, cfg)
        b = stormer_verlet_step(b, spec, cfg)
        gap = max(gap, np.max(np.abs(a.u.values - b.u.values)))
        gap = max(gap, np.max(np.abs(a.v.values - b.v.values)))
    ok = gap <= 1e-12
    assert report("A8", ok, f"beta=0 vs Stormer-Verlet max-norm gap {gap:.2e} over 100 steps")


def test_a09_discontinuous_ic():
    bench = jump_benchmark()
    if FULL:
        dt, t_eval, tv_time = 1e-4, 5.0, 4.0
    else:
        dt, t_eval, tv_time = 1e-3, 1.0, 1.0
    ns = [5, 10, 20, 40]
    n_ref = 80
    runs = {}
    for n in ns:
        _, res = run_benchmark(bench, n, dt, t_eval)
        runs[n] = res.final.u
    prep_ref, res_ref = run_benchmark(bench, n_ref, dt, t_eval, snapshot_times=[tv_time])
    u_ref = res_ref.final.u
    errors = []
    for n in ns:
        sub = Field(Grid2D(0, 1, n), u_ref.values[:: n_ref // n, :: n_ref // n].copy())
        errors.append(relative_l2_error(runs[n], sub))
    dxs = [1.0 / n for n in ns]
    # norm-scale rates: half the printed squared-metric rate
    rates = [
        observed_rate(e0, e1, d0 / d1) / 2
        for (d0, e0), (d1, e1) in zip(zip(dxs, errors), zip(dxs[1:], errors[1:]))
    ]
    rates_ok = all(1.0 <= r <= 1.7 for r in rates)
    tv0 = total_variation(prep_ref.initial.u)
    tv_snap = total_variation(res_ref.states[0].u)
    tv_ok = tv_snap > tv0
    detail = (
        f"norm-scale rates {[round(r, 3) for r in rates]} in [1.0, 1.7]; "
        f"TV(t={tv_time:g}) {tv_snap:.4f} vs TV(0) {tv0:.4f} "
        f"({'grew' if tv_ok else 'did not grow'})"
    )
    if not FULL:
        # the radiated waves overtake the smoothing of the initial jump
        # only after t ~ 5, so the smoke tier reports TV without judging it
        assert report("A9", rates_ok, detail + " [TV clause judged at full tier]")
    else:
        assert report("A9", rates_ok and tv_ok, detail)


def test_a10_stability_sublinear():
    bench = BenchmarkSpec(
        "ramp-linear", r=1, ic_name="linear_ramp", ic_params={"c1": -0.5, "c2": -0.5}
    )
    norms = []
    run_benchmark(
        bench,
        100,
        0.01,
        10.0,
        newton_tol=1e-10,
        krylov_tol=1e-12,
        observer=lambda st: norms.append(l2_norm(st.u)),
    )
    u0 = norms[0]
    dt = 0.01
    m0 = max(max((norms[s] - u0) / (s * dt) for s in range(1, 11)), 0.0)
    bound_ok = all(
        norms[s] <= u0 + 1.2 * m0 * (s * dt) + 1e-9 * u0 for s in range(len(norms))
    )
    assert report(
        "A10",
        bound_ok,
        f"||u_s|| <= ||u0|| + 1.2 M0 t_s with M0={m0:.3e}, max ||u_s||={max(norms):.6f}, "
        f"||u0||={u0:.6f}, T=10",
    )


def test_a11_penalization():
    bench = smooth_benchmark()
    pen = PenalizationSettings(mu=0.2, epsilon=0.2)
    if FULL:
        dt, t_eval = 1e-4, 5.0
    else:
        dt, t_eval = 1e-3, 1.0
    table = spatial_convergence_study(bench, [5, 10, 20, 40], dt, t_eval, pen_settings=pen)
    rates = table.rates()
    rates_ok = all(2.0 <= r <= 2.9 for r in rates)

    # support confinement: the penalization term vanishes identically on
    # the physical domain for any input
    grid = build_grid(0, 1, 20)
    ext, mask = extend_domain(grid, 0.2)
    pcfg = PenalizationConfig(mask, 0.2)
    w = interior_window(grid, ext)
    confined = True
    for _ in range(5):
        u, rhs = rand_field(ext), rand_field(ext)
        out = penalized_rhs(u, rhs, pcfg)
        confined = confined and np.array_equal(out.values[w, w], rhs.values[w, w])
    ok = rates_ok and confined
    assert report(
        "A11",
        ok,
        f"rates {[round(r, 3) for r in rates]} in [2.0, 2.9]; "
        f"penalization term zero on physical domain: {confined}",
    )


def test_a12_newton_behavior():
    bench = smooth_benchmark()
    _, res = run_benchmark(bench, 100, 1e-3, 0.5, newton_tol=1e-10, krylov_tol=1e-12)
    median = statistics.median(res.newton_iterations)
    bench1 = BenchmarkSpec(
        "ramp-linear", r=1, ic_name="linear_ramp", ic_params={"c1": -0.5, "c2": -0.5}
    )
    # dt large enough that the predictor is never already converged
    _, res1 = run_benchmark(bench1, 100, 0.05, 2.5, newton_tol=1e-10, krylov_tol=1e-12)
    counts = set(res1.newton_iterations)
    ok = median <= 3 and counts == {1}
    assert report(
        "A12",
        ok,
        f"median iterations {median} (<= 3) at dt=1e-3; linear case counts {sorted(counts)} "
        f"(affine residual solves in exactly one update)",
    )
