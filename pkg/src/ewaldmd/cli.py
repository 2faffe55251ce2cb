"""Command-line entry points.

Subcommands: ``run`` (NVE dynamics with timings), ``bench-complexity``
(per-iteration time against particle count plus a log-log slope fit),
``bench-threads`` (strong scaling at fixed N), ``bench-backends`` (numba
kernels against the numpy fallback) and ``verify`` (oracle suite).

Exit codes: 0 success, 1 check failure, 2 usage or configuration error.
"""

import argparse
import sys

from . import backend
from .bench import (
    BACKENDS_COLUMNS,
    COMPLEXITY_COLUMNS,
    THREADS_COLUMNS,
    bench_backends,
    bench_complexity,
    bench_threads,
    fit_loglog_slope,
    write_csv,
)
from .config import parse_config
from .core import EwaldmdError
from .driver import run as run_dynamics
from .verify import KNOWN_FAULTS, report, run_checks
from .xyz import read_xyz, write_xyz


def _int_list(text):
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") \
            from err


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ewaldmd",
        description="Ewald electrostatics benchmark and validation driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="advance NVE dynamics per the config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--particles", help="extended-XYZ file overriding the "
                       "built-in rock-salt lattice")
    p_run.add_argument("--write-xyz", help="write final positions here")

    p_cx = sub.add_parser("bench-complexity",
                          help="time per iteration against particle count")
    p_cx.add_argument("--config", required=True)
    p_cx.add_argument("--n-list", type=_int_list,
                      default=[1728, 4096, 8000, 17576])
    p_cx.add_argument("--out", default="complexity.csv")
    p_cx.add_argument("--append", action="store_true")

    p_th = sub.add_parser("bench-threads",
                          help="strong scaling sweep at fixed N")
    p_th.add_argument("--config", required=True)
    p_th.add_argument("--threads-list", type=_int_list, default=[1, 2, 4, 8])
    p_th.add_argument("--n", type=int, default=32768)
    p_th.add_argument("--box", type=float, default=80.0)
    p_th.add_argument("--out", default="threads.csv")
    p_th.add_argument("--append", action="store_true")

    p_bk = sub.add_parser("bench-backends",
                          help="numba kernels vs the numpy fallback")
    p_bk.add_argument("--config", required=True)
    p_bk.add_argument("--n", type=int, default=1728)
    p_bk.add_argument("--out", default="backends.csv")
    p_bk.add_argument("--append", action="store_true")

    p_vf = sub.add_parser("verify", help="run the oracle validation suite")
    p_vf.add_argument("--config", required=True)
    p_vf.add_argument("--json", help="also write a JSON-lines report here")
    p_vf.add_argument("--fault", choices=KNOWN_FAULTS,
                      help="inject a known defect (testing the suite itself)")
    return parser


def _cmd_run(args, config):
    if args.particles:
        ps = read_xyz(args.particles)
        ps.wrap()
    else:
        from .driver import init_rocksalt, rocksalt_cells_for
        cells = rocksalt_cells_for(config.n_particles)
        ps = init_rocksalt(cells, config.box_edge / (2 * cells))
    metrics = run_dynamics(config, ps=ps)
    ke, pe = metrics.energy_trace[-1]
    print(f"backend={backend.get_backend()} threads={config.threads}")
    print(f"steps={metrics.n_steps} N={config.n_particles} "
          f"alpha={metrics.alpha:.6g} r_c={metrics.r_cutoff:.6g} "
          f"N_k={metrics.n_k}")
    print(f"energy: kinetic={ke:.10g} potential={pe:.10g} "
          f"total={ke + pe:.10g}")
    if metrics.n_steps > 0:
        print(f"drift={metrics.drift:.3e} "
              f"max_step_displacement={metrics.max_step_displacement:.4g} A")
        print(f"t_per_iter={metrics.median_step_wall():.6g} s "
              f"(sr={metrics.median_component('t_sr'):.4g} "
              f"alg1={metrics.median_component('t_alg1'):.4g} "
              f"alg2={metrics.median_component('t_alg2'):.4g} "
              f"lj={metrics.median_component('t_lj'):.4g})")
    if args.write_xyz:
        write_xyz(ps, args.write_xyz)
    return 0


def _cmd_bench_complexity(args, config):
    rows, slope = bench_complexity(config, args.n_list)
    write_csv(args.out, COMPLEXITY_COLUMNS, rows, append=args.append)
    for row in rows:
        print(f"N={row[0]:>7d} t_per_iter={row[1]:.6g} s")
    if slope is not None:
        print(f"log-log slope: {slope:.3f} (O(N^1.5) bound)")
    else:
        print("single N: slope omitted")
    print(f"wrote {args.out}")
    return 0


def _cmd_bench_threads(args, config):
    rows = bench_threads(config, args.threads_list, n=args.n,
                         box_edge=args.box)
    write_csv(args.out, THREADS_COLUMNS, rows, append=args.append)
    for workers, t_iter, speedup, eff in rows:
        print(f"threads={workers:>3d} t_per_iter={t_iter:.6g} s "
              f"speedup={speedup:.2f} efficiency={eff:.2f}")
    print(f"wrote {args.out}")
    return 0


def _cmd_bench_backends(args, config):
    rows = bench_backends(config, n=args.n)
    write_csv(args.out, BACKENDS_COLUMNS, rows, append=args.append)
    for row in rows:
        print(f"backend={row[0]:<6s} N={row[1]} t_per_iter={row[2]:.6g} s")
    print(f"wrote {args.out}")
    return 0


def _cmd_verify(args, config):
    results = run_checks(config, fault=args.fault)
    passed = report(results, sys.stdout, json_path=args.json)
    return 0 if passed else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = parse_config(args.config)
    except EwaldmdError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    handlers = {
        "run": _cmd_run,
        "bench-complexity": _cmd_bench_complexity,
        "bench-threads": _cmd_bench_threads,
        "bench-backends": _cmd_bench_backends,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args, config)
    except EwaldmdError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
