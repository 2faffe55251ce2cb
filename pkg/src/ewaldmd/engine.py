"""Particle and pair loop execution with access descriptors.

A kernel is a scalar body invoked once per particle (ParticleLoop) or once
per ordered pair (i, j) within the cutoff (PairLoop), plus an optional
vectorised form used by the numpy backend.  Bodies receive the bound
particle-property arrays and global-accumulator vectors declared by their
access descriptors; READ targets are passed as read-only views, INC targets
accumulate, and INC_ZERO targets are zeroed before the loop runs.

Workers partition particles into contiguous index blocks.  Each worker owns
writes to its own block's particle rows (kernels write only to the centre
particle) and accumulates into a private copy of every INC/INC_ZERO global,
which is reduced in worker-index order afterwards, so a loop's outputs are
deterministic for a fixed worker count.
"""

import numpy as np

from . import backend
from .backend import HAVE_NUMBA
from .celllist import gather_pairs
from .core import INC, INC_ZERO, READ, ContractViolationError, GlobalAccumulator

if HAVE_NUMBA:
    from numba import njit
    from numba.core.errors import TypingError
else:  # pragma: no cover - numba is a hard dependency in practice
    class TypingError(Exception):
        pass


class Kernel:
    """A loop body plus the access descriptors binding its parameters.

    Parameters
    ----------
    name : str
        Identifier used in error messages.
    body : callable
        Scalar form.  Pair loops call ``body(i, j, dx, dy, dz, r2, dats,
        gread, ginc)`` with (dx, dy, dz) the minimum-image displacement
        r_i - r_j and r2 its squared norm; particle loops call
        ``body(i, dats, gread, ginc)``.  ``dats`` is the tuple of bound
        particle-property arrays, ``gread``/``ginc`` the tuples of read-only
        and incremented global vectors.  Bodies must write particle rows of
        the centre index only.
    dats : sequence of (property_name, Access)
        Particle properties the body uses, in argument order.
    glob : sequence of Access
        Access modes of the global vectors bound at loop creation.
    vbody : callable, optional
        Vectorised form for the numpy backend.  Pair loops call
        ``vbody(i_idx, j_idx, dx, dy, dz, r2, dats, gread, ginc)`` over all
        pairs of one worker block; particle loops call
        ``vbody(i0, i1, dats, gread, ginc)`` over a block range.
    """

    def __init__(self, name, body, dats=(), glob=(), vbody=None,
                 fastmath=False):
        self.name = name
        self.body = body
        self.vbody = vbody
        self.dats = tuple((str(n), a) for n, a in dats)
        self.glob = tuple(glob)
        self.fastmath = fastmath
        self._jit_body = None

    @property
    def jit_body(self):
        if self._jit_body is None:
            self._jit_body = backend.jit_kernel(self.body, self.fastmath)
        return self._jit_body


def block_bounds(n, workers):
    """Contiguous block boundaries partitioning range(n) across workers."""
    base, rem = divmod(n, workers)
    sizes = np.full(workers, base, dtype=np.int64)
    sizes[:rem] += 1
    bounds = np.zeros(workers + 1, dtype=np.int64)
    np.cumsum(sizes, out=bounds[1:])
    return bounds


def reduce_global(partials):
    """Element-wise sum of per-worker partial vectors in worker-index order."""
    partials = list(partials)
    out = np.zeros_like(partials[0])
    for p in partials:
        out += p
    return out


def _readonly(arr):
    view = arr.view()
    view.setflags(write=False)
    return view


if HAVE_NUMBA:

    @njit(nogil=True)
    def _pair_block_jit(body, i0, i1, pos, L, rc2, cell_of, order, cell_start,
                        stencil, stencil_count, n_cells, dats, gread, ginc):
        hl = 0.5 * L
        for i in range(i0, i1):
            xi = pos[i, 0]
            yi = pos[i, 1]
            zi = pos[i, 2]
            ci = cell_of[i]
            if stencil_count[ci] == n_cells:
                # stencil spans the whole box: scan contiguously instead of
                # hopping through the cell-sorted order
                for j in range(pos.shape[0]):
                    if j == i:
                        continue
                    dx = xi - pos[j, 0]
                    if dx >= hl:
                        dx -= L
                    elif dx < -hl:
                        dx += L
                    dy = yi - pos[j, 1]
                    if dy >= hl:
                        dy -= L
                    elif dy < -hl:
                        dy += L
                    dz = zi - pos[j, 2]
                    if dz >= hl:
                        dz -= L
                    elif dz < -hl:
                        dz += L
                    r2 = dx * dx + dy * dy + dz * dz
                    if r2 < rc2:
                        body(i, j, dx, dy, dz, r2, dats, gread, ginc)
            else:
                for s in range(stencil_count[ci]):
                    c = stencil[ci, s]
                    for p in range(cell_start[c], cell_start[c + 1]):
                        j = order[p]
                        if j == i:
                            continue
                        dx = xi - pos[j, 0]
                        if dx >= hl:
                            dx -= L
                        elif dx < -hl:
                            dx += L
                        dy = yi - pos[j, 1]
                        if dy >= hl:
                            dy -= L
                        elif dy < -hl:
                            dy += L
                        dz = zi - pos[j, 2]
                        if dz >= hl:
                            dz -= L
                        elif dz < -hl:
                            dz += L
                        r2 = dx * dx + dy * dy + dz * dz
                        if r2 < rc2:
                            body(i, j, dx, dy, dz, r2, dats, gread, ginc)

    @njit(nogil=True)
    def _particle_block_jit(body, i0, i1, dats, gread, ginc):
        for i in range(i0, i1):
            body(i, dats, gread, ginc)


def _pair_block_py(body, i0, i1, pos, L, rc2, cl, dats, gread, ginc):
    hl = 0.5 * L
    for i in range(i0, i1):
        ci = cl.cell_of[i]
        if cl.stencil_count[ci] == cl.n_cells:
            candidates = range(pos.shape[0])
        else:
            candidates = (
                int(cl.order[p])
                for s in range(cl.stencil_count[ci])
                for p in range(cl.cell_start[cl.stencil[ci, s]],
                               cl.cell_start[cl.stencil[ci, s] + 1])
            )
        for j in candidates:
            if j == i:
                continue
            dx = pos[i, 0] - pos[j, 0]
            if dx >= hl:
                dx -= L
            elif dx < -hl:
                dx += L
            dy = pos[i, 1] - pos[j, 1]
            if dy >= hl:
                dy -= L
            elif dy < -hl:
                dy += L
            dz = pos[i, 2] - pos[j, 2]
            if dz >= hl:
                dz -= L
            elif dz < -hl:
                dz += L
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                body(i, j, dx, dy, dz, r2, dats, gread, ginc)


def _particle_block_py(body, i0, i1, dats, gread, ginc):
    for i in range(i0, i1):
        body(i, dats, gread, ginc)


class _LoopBase:
    def __init__(self, kernel, globals_=()):
        globals_ = tuple(globals_)
        if len(globals_) != len(kernel.glob):
            raise ValueError(
                f"kernel {kernel.name!r} declares {len(kernel.glob)} globals, "
                f"{len(globals_)} bound"
            )
        self.kernel = kernel
        self.globals_ = globals_

    def _bind(self, ps, workers):
        """Resolve dat arrays, global views and per-worker INC stacks."""
        kernel = self.kernel
        dats = []
        for name, mode in kernel.dats:
            arr = ps.property_array(name)
            if mode is READ:
                arr = _readonly(arr)
            elif mode is INC_ZERO:
                arr[:] = 0.0
            dats.append(arr)

        gread = []
        stacks = []  # (target_array, mode, per-worker stack)
        ginc_views = [[] for _ in range(workers)]
        for acc, mode in zip(self.globals_, kernel.glob):
            target = acc.values if isinstance(acc, GlobalAccumulator) else acc
            if mode is READ:
                gread.append(_readonly(np.asarray(target)))
            else:
                stack = np.zeros((workers, target.shape[0]))
                stacks.append((target, mode, stack))
                for w in range(workers):
                    ginc_views[w].append(stack[w])
        gread = tuple(gread)
        ginc = [tuple(v) for v in ginc_views]
        return tuple(dats), gread, ginc, stacks

    @staticmethod
    def _reduce(stacks):
        for target, mode, stack in stacks:
            red = reduce_global(stack)
            if mode is INC:
                target += red
            else:
                target[:] = red

    def _run_blocks(self, run_one, bounds, workers, parallel):
        jobs = [
            (w, int(bounds[w]), int(bounds[w + 1]))
            for w in range(workers)
            if bounds[w] < bounds[w + 1]
        ]
        try:
            if parallel and len(jobs) > 1:
                pool = backend.worker_pool(len(jobs))
                futures = [pool.submit(run_one, w, i0, i1)
                           for w, i0, i1 in jobs]
                for f in futures:
                    f.result()
            else:
                for w, i0, i1 in jobs:
                    run_one(w, i0, i1)
        except TypingError as err:
            if "readonly" in str(err):
                raise ContractViolationError(
                    f"kernel {self.kernel.name!r} wrote a READ target"
                ) from err
            raise


class PairLoop(_LoopBase):
    """Executes a kernel over every ordered pair within the cell-list cutoff."""

    def execute(self, ps, cell_list, workers=None, debug=False):
        workers = backend.resolve_workers(workers)
        dats, gread, ginc, stacks = self._bind(ps, workers)
        pos = _readonly(ps.position)
        L = ps.box.edge_length
        rc2 = cell_list.r_cutoff**2
        bounds = block_bounds(ps.count, workers)
        mode = "python" if debug else backend.get_backend()

        if mode == "numba":
            body = self.kernel.jit_body
            cl = cell_list

            def run_one(w, i0, i1):
                _pair_block_jit(body, i0, i1, pos, L, rc2, cl.cell_of,
                                cl.order, cl.cell_start, cl.stencil,
                                cl.stencil_count, cl.n_cells, dats, gread,
                                ginc[w])

            self._run_blocks(run_one, bounds, workers, parallel=True)
        elif mode == "numpy" and self.kernel.vbody is not None:
            vbody = self.kernel.vbody
            for w in range(workers):
                i0, i1 = int(bounds[w]), int(bounds[w + 1])
                if i0 == i1:
                    continue
                pairs = gather_pairs(cell_list, pos, L, i0, i1)
                vbody(*pairs, dats, gread, ginc[w])
        else:
            body = self.kernel.body
            for w in range(workers):
                i0, i1 = int(bounds[w]), int(bounds[w + 1])
                try:
                    _pair_block_py(body, i0, i1, pos, L, rc2, cell_list,
                                   dats, gread, ginc[w])
                except ValueError as err:
                    if "read-only" in str(err):
                        raise ContractViolationError(
                            f"kernel {self.kernel.name!r} wrote a READ target"
                        ) from err
                    raise
        self._reduce(stacks)


class ParticleLoop(_LoopBase):
    """Executes a kernel once per particle."""

    def execute(self, ps, workers=None, debug=False):
        workers = backend.resolve_workers(workers)
        dats, gread, ginc, stacks = self._bind(ps, workers)
        bounds = block_bounds(ps.count, workers)
        mode = "python" if debug else backend.get_backend()

        if mode == "numba":
            body = self.kernel.jit_body

            def run_one(w, i0, i1):
                _particle_block_jit(body, i0, i1, dats, gread, ginc[w])

            self._run_blocks(run_one, bounds, workers, parallel=True)
        elif mode == "numpy" and self.kernel.vbody is not None:
            vbody = self.kernel.vbody
            for w in range(workers):
                i0, i1 = int(bounds[w]), int(bounds[w + 1])
                if i0 < i1:
                    vbody(i0, i1, dats, gread, ginc[w])
        else:
            body = self.kernel.body
            for w in range(workers):
                i0, i1 = int(bounds[w]), int(bounds[w + 1])
                try:
                    _particle_block_py(body, i0, i1, dats, gread, ginc[w])
                except ValueError as err:
                    if "read-only" in str(err):
                        raise ContractViolationError(
                            f"kernel {self.kernel.name!r} wrote a READ target"
                        ) from err
                    raise
        self._reduce(stacks)


def execute_pair_loop(kernel, ps, cell_list, globals_=(), workers=None,
                      debug=False):
    """One-shot pair loop execution (see PairLoop for the contract)."""
    PairLoop(kernel, globals_).execute(ps, cell_list, workers, debug)


def execute_particle_loop(kernel, ps, globals_=(), workers=None, debug=False):
    """One-shot particle loop execution (see ParticleLoop for the contract)."""
    ParticleLoop(kernel, globals_).execute(ps, workers, debug)
