import math

import numpy as np
import pytest

import ewaldmd as em
from ewaldmd import backend
from ewaldmd.core import INC_ZERO, READ
from ewaldmd.engine import Kernel


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Compile every production kernel once so timed tests measure compute."""
    if backend.get_backend() != "numba":
        return
    ps = em.init_rocksalt(1, 2.82)
    params = em.choose_parameters(ps.count, ps.box, 1e-3)
    solver = em.EwaldSolver(ps.box, params, workers=2)
    solver.evaluate(ps)
    kern, consts = em.lj_kernel(em.LJParams(r_cutoff_lj=2.8))
    acc = em.GlobalAccumulator(1)
    cl = em.build_cell_list(ps, ps.box, 2.8)
    em.execute_pair_loop(kern, ps, cl, (consts, acc), workers=2)
    s = math.sqrt(-math.log(1e-3))
    a = params.alpha / 2.0
    wide = em.EwaldParams(alpha=a, r_cutoff=s / math.sqrt(a),
                          k_cutoff=2.0 * s * math.sqrt(a), tolerance=1e-3)
    ps.force[:] = 0.0
    em.total_coulomb(ps, wide)


def random_neutral(n, box_edge, seed, min_sep=0.8, unit_charges=False):
    """Random neutral configuration with a minimum pair separation.

    Charges come in +-q pairs so the net charge is exactly zero.
    """
    assert n % 2 == 0
    rng = np.random.default_rng(seed)
    box = em.SimulationBox(box_edge)
    ps = em.create_particle_set(n, box)
    placed = 0
    pos = np.empty((n, 3))
    while placed < n:
        cand = rng.random(3) * box_edge
        d = pos[:placed] - cand
        d -= box_edge * np.floor(d / box_edge + 0.5)
        if placed and (d**2).sum(axis=1).min() < min_sep**2:
            continue
        pos[placed] = cand
        placed += 1
    ps.position[:] = pos
    if unit_charges:
        mag = np.ones(n // 2)
    else:
        mag = rng.random(n // 2) + 0.5
    ps.charge[: n // 2] = mag
    ps.charge[n // 2:] = -mag
    return ps


def brute_force_pairs(pos, box_edge, r_cutoff):
    """Ordered pairs under the minimum image with separation < r_cutoff."""
    d = pos[:, None, :] - pos[None, :, :]
    d -= box_edge * np.floor(d / box_edge + 0.5)
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, np.inf)
    ii, jj = np.nonzero(r2 < r_cutoff**2)
    return set(zip(ii.tolist(), jj.tolist()))


def assert_forces_match(actual, reference, rel=1e-4, abs_floor=1e-8):
    """Component-wise check: relative tolerance with an absolute floor for
    components whose scale is tiny (symmetry zeros vs finite-difference
    noise)."""
    actual = np.asarray(actual)
    reference = np.asarray(reference)
    limit = np.maximum(rel * np.abs(reference), abs_floor)
    bad = np.abs(actual - reference) > limit
    assert not bad.any(), (
        f"{bad.sum()} force components off; worst "
        f"|d|={np.abs(actual - reference).max():.3e}"
    )


def _visit_body(i, j, dx, dy, dz, r2, dats, gread, ginc):
    n = dats[0].shape[0]
    ginc[0][i * n + j] += 1.0


def visit_kernel():
    """Pair kernel marking every visited ordered pair in an N*N accumulator."""
    return Kernel("visit_pairs", _visit_body, dats=(("charge", READ),),
                  glob=(INC_ZERO,))


def visited_pair_multiset(ps, cell_list, workers=1):
    acc = em.GlobalAccumulator(ps.count * ps.count)
    em.execute_pair_loop(visit_kernel(), ps, cell_list, (acc,),
                         workers=workers)
    counts = acc.values.astype(np.int64)
    n = ps.count
    pairs = {(k // n, k % n) for k in np.nonzero(counts)[0]}
    return pairs, int(counts.max(initial=0))
