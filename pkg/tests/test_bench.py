import numpy as np
import pytest

import ewaldmd as em
from ewaldmd.bench import (
    BACKENDS_COLUMNS,
    bench_backends,
    bench_complexity,
    bench_threads,
    fit_loglog_slope,
)


def small_config(**kw):
    base = dict(n_particles=216, box_edge=15.0, tolerance=1e-4, dt=0.01,
                threads=1, lj_on=False)
    base.update(kw)
    return em.SimConfig(**base)


class TestSlopeFit:
    def test_synthetic_three_halves_power(self):
        ns = np.array([1728, 4096, 8000, 17576], dtype=float)
        ts = 2.5e-9 * ns**1.5
        assert fit_loglog_slope(ns, ts) == pytest.approx(1.50, abs=0.01)

    def test_injected_timer_through_bench(self):
        rows, slope = bench_complexity(small_config(),
                                       [1728, 4096, 8000, 17576],
                                       timer=lambda n: 3e-9 * n**1.5)
        assert slope == pytest.approx(1.50, abs=0.01)
        assert [r[0] for r in rows] == [1728, 4096, 8000, 17576]

    def test_single_point_rejected(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([100], [1.0])


class TestBenchComplexity:
    def test_single_n_emits_row_without_slope(self):
        rows, slope = bench_complexity(small_config(), [216])
        assert slope is None
        assert len(rows) == 1
        n, t_iter, t_sr, t1, t2, alpha, r_c, n_k = rows[0]
        assert n == 216 and t_iter > 0.0 and alpha > 0.0 and n_k > 0

    def test_non_lattice_count_rejected(self):
        with pytest.raises(em.LatticeError):
            bench_complexity(small_config(), [100])


class TestBenchThreads:
    def test_single_thread_speedup_is_unity(self):
        rows = bench_threads(small_config(), [1], n=216, box_edge=15.0)
        workers, t_iter, speedup, eff = rows[0]
        assert workers == 1
        assert speedup == 1.0
        assert eff == 1.0

    def test_sweep_overrides_config_threads_with_warning(self):
        cfg = small_config(threads=4)
        with pytest.warns(UserWarning, match="takes precedence"):
            rows = bench_threads(cfg, [1, 2], n=216, box_edge=15.0)
        assert [r[0] for r in rows] == [1, 2]

    def test_reference_measured_when_one_absent(self):
        rows = bench_threads(small_config(), [2], n=216, box_edge=15.0)
        assert rows[0][0] == 2
        assert rows[0][2] > 0.0  # speedup defined against implicit w=1 run


class TestBenchBackends:
    def test_both_backends_reported(self):
        rows = bench_backends(small_config(), n=216)
        names = [r[0] for r in rows]
        assert "numpy" in names
        if em.get_backend() == "numba":
            assert "numba" in names
        assert len(BACKENDS_COLUMNS) == len(rows[0])
        # comparison stays on the active backend afterwards
        assert em.get_backend() in ("numba", "numpy")
