"""Benchmark harnesses: complexity sweep, thread sweep, backend comparison.

All timings are the median of at least five iterations after two warm-up
iterations; results are emitted as CSV with stable column names.
"""

import csv
import dataclasses
import os
import warnings

import numpy as np

from . import backend
from .driver import BENCH_SPACING, RunMetrics, rocksalt_cells_for, run

COMPLEXITY_COLUMNS = ("N", "t_total_per_iter", "t_sr", "t_alg1", "t_alg2",
                      "alpha", "r_c", "N_k")
THREADS_COLUMNS = ("threads", "t_per_iter", "speedup", "efficiency")
BACKENDS_COLUMNS = ("backend", "N", "t_per_iter", "t_sr", "t_alg1", "t_alg2")

WARMUP_ITERS = 2
TIMED_ITERS = 5


def fit_loglog_slope(ns, ts):
    """Least-squares slope of log(t) against log(N)."""
    ns = np.asarray(ns, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if ns.shape[0] < 2:
        raise ValueError("slope fit needs at least two points")
    slope, _ = np.polyfit(np.log(ns), np.log(ts), 1)
    return float(slope)


def write_csv(path, header, rows, append=False):
    """Write rows under a stable header; appending never repeats the header."""
    exists = os.path.exists(path) and os.path.getsize(path) > 0
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if not (append and exists):
            writer.writerow(header)
        writer.writerows(rows)


def _timed_run(config, n, box_edge):
    cfg = dataclasses.replace(
        config,
        n_particles=n,
        box_edge=box_edge,
        n_steps=WARMUP_ITERS + TIMED_ITERS,
        velocity_scale=0.0,
    )
    return run(cfg)


def bench_complexity(config, n_list, timer=None):
    """Per-iteration timing against particle count at the benchmark density.

    Each N must be a (2c)^3 rock-salt count; the box edge follows from the
    fixed density of one atom per (2.5 A)^3.  Returns (rows, slope); slope
    is None for a single N.  ``timer`` replaces the measurement with a
    synthetic t(N) function (test mode for the fit itself).
    """
    rows = []
    for n in n_list:
        cells = rocksalt_cells_for(n)
        box_edge = 2 * cells * BENCH_SPACING
        if timer is not None:
            t_iter = float(timer(n))
            metrics = RunMetrics(n_steps=0)
        else:
            metrics = _timed_run(config, n, box_edge)
            t_iter = metrics.median_step_wall(WARMUP_ITERS)
        rows.append((
            n,
            t_iter,
            metrics.median_component("t_sr", WARMUP_ITERS),
            metrics.median_component("t_alg1", WARMUP_ITERS),
            metrics.median_component("t_alg2", WARMUP_ITERS),
            metrics.alpha,
            metrics.r_cutoff,
            metrics.n_k,
        ))
    slope = None
    if len(rows) >= 2:
        slope = fit_loglog_slope([r[0] for r in rows], [r[1] for r in rows])
    return rows, slope


def bench_threads(config, thread_list, n=32768, box_edge=80.0):
    """Strong-scaling sweep at fixed N; speedups are relative to one worker.

    A threads key in the config is overridden by the sweep list (with a
    warning); monotone scaling is expected but recorded either way.
    """
    thread_list = list(thread_list)
    if config.threads not in (0, 1) and thread_list:
        warnings.warn(
            f"config threads={config.threads} ignored; sweep list "
            f"{thread_list} takes precedence",
            stacklevel=2,
        )

    timings = {}

    def measure(workers):
        if workers not in timings:
            cfg = dataclasses.replace(config, threads=workers)
            metrics = _timed_run(cfg, n, box_edge)
            timings[workers] = metrics.median_step_wall(WARMUP_ITERS)
        return timings[workers]

    t_one = measure(1)  # speedups are defined against one worker
    rows = []
    for workers in thread_list:
        t_iter = measure(workers)
        speedup = t_one / t_iter
        rows.append((workers, t_iter, speedup, speedup / workers))
    return rows


def bench_backends(config, n=1728, backends=("numba", "numpy")):
    """Per-iteration cost of the numba kernels against the numpy fallback."""
    cells = rocksalt_cells_for(n)
    box_edge = 2 * cells * BENCH_SPACING
    rows = []
    previous = backend.get_backend()
    try:
        for name in backends:
            if name == "numba" and not backend.HAVE_NUMBA:
                continue
            backend.set_backend(name)
            metrics = _timed_run(config, n, box_edge)
            rows.append((
                name,
                n,
                metrics.median_step_wall(WARMUP_ITERS),
                metrics.median_component("t_sr", WARMUP_ITERS),
                metrics.median_component("t_alg1", WARMUP_ITERS),
                metrics.median_component("t_alg2", WARMUP_ITERS),
            ))
    finally:
        backend.set_backend(previous)
    return rows
