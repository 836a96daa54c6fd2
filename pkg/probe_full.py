"""Probe: full-config Table-1/Table-5/Table-3 ladders, both error metrics."""
import math
import time

from peridyn.experiments import (
    PenalizationSettings,
    jump_benchmark,
    run_benchmark,
    smooth_benchmark,
)
from peridyn.grid import Field, Grid2D, relative_l2_error


def sub(u, f):
    g = u.grid
    return Field(Grid2D(g.a, g.b, g.n_points // f), u.values[::f, ::f].copy())


def study_both(tag, bench, ns, dt, t_eval, pen=None):
    ns = sorted(ns)
    n_ref = 2 * ns[-1]
    runs = {}
    for n in ns + [n_ref]:
        t0 = time.perf_counter()
        prep, res = run_benchmark(bench, n, dt, t_eval, pen_settings=pen)
        runs[n] = prep.to_physical(res.final.u)
        niter = res.newton_iterations
        print(
            f"  [{tag}] N={n}: {time.perf_counter()-t0:.1f}s "
            f"newton median={sorted(niter)[len(niter)//2] if niter else 0} max={max(niter) if niter else 0}",
            flush=True,
        )
    print(f"[{tag}] {'dx':>8} {'E(squared)':>12} {'rate':>7} {'sqrt(E)':>12} {'rate':>7}")
    prev = None
    for n in ns:
        dx = (bench.b - bench.a) / n
        e2 = relative_l2_error(runs[n], sub(runs[n_ref], n_ref // n))
        e1 = math.sqrt(e2)
        if prev is None:
            r2s = r1s = "    nan"
        else:
            r2s = f"{math.log(prev[1]/e2)/math.log(prev[0]/dx):7.3f}"
            r1s = f"{math.log(prev[2]/e1)/math.log(prev[0]/dx):7.3f}"
        print(f"[{tag}] {dx:8.4f} {e2:12.4e} {r2s} {e1:12.4e} {r1s}", flush=True)
        prev = (dx, e2, e1)


t_all = time.perf_counter()
study_both("T1-smooth", smooth_benchmark(), [5, 10, 20, 40], 1e-4, 5.0)
print(f"smooth ladder total {time.perf_counter()-t_all:.0f}s", flush=True)

t0 = time.perf_counter()
study_both("T5-jump", jump_benchmark(), [5, 10, 20, 40], 1e-4, 5.0)
print(f"jump ladder total {time.perf_counter()-t0:.0f}s", flush=True)

t0 = time.perf_counter()
study_both(
    "T3-penal",
    smooth_benchmark(),
    [5, 10, 20, 40],
    1e-4,
    5.0,
    pen=PenalizationSettings(mu=0.2, epsilon=0.2),
)
print(f"penalized ladder total {time.perf_counter()-t0:.0f}s", flush=True)
print(f"ALL DONE in {time.perf_counter()-t_all:.0f}s", flush=True)
