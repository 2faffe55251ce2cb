"""Cell list construction for O(N) cutoff pair looping.

Particles are binned into a cubic grid of edge >= r_c so that every pair
closer than r_c (minimum image) lies in the same or an adjacent cell.  The
list stores particles sorted by cell (``order`` + ``cell_start`` ranges) and
a per-cell stencil of distinct periodic neighbour cells; with only two cells
per dimension the 27-point stencil folds onto fewer distinct cells, so the
stencil is deduplicated at build time to keep pair visits exact.
"""

import numpy as np

from .core import CutoffTooLargeError


class CellList:
    """Spatial binning of one particle configuration at cutoff r_cutoff."""

    __slots__ = (
        "r_cutoff",
        "cell_edge",
        "cells_per_dim",
        "n_cells",
        "cell_of",
        "order",
        "cell_start",
        "stencil",
        "stencil_count",
    )

    def __init__(self, r_cutoff, cell_edge, cells_per_dim, cell_of, order,
                 cell_start, stencil, stencil_count):
        self.r_cutoff = r_cutoff
        self.cell_edge = cell_edge
        self.cells_per_dim = cells_per_dim
        self.n_cells = cells_per_dim**3
        self.cell_of = cell_of
        self.order = order
        self.cell_start = cell_start
        self.stencil = stencil
        self.stencil_count = stencil_count

    def cell_members(self, c):
        """Particle indices stored in cell c."""
        return self.order[self.cell_start[c]:self.cell_start[c + 1]]


def _build_stencil(cpd):
    """Per-cell arrays of distinct periodic 27-stencil neighbour cell ids."""
    n_cells = cpd**3
    cells = np.arange(n_cells)
    cx = cells % cpd
    cy = (cells // cpd) % cpd
    cz = cells // (cpd * cpd)
    offs = np.array(
        [(ox, oy, oz) for oz in (-1, 0, 1) for oy in (-1, 0, 1) for ox in (-1, 0, 1)],
        dtype=np.int64,
    )
    nx = (cx[:, None] + offs[None, :, 0]) % cpd
    ny = (cy[:, None] + offs[None, :, 1]) % cpd
    nz = (cz[:, None] + offs[None, :, 2]) % cpd
    nids = nx + cpd * (ny + cpd * nz)

    nids.sort(axis=1)
    keep = np.ones_like(nids, dtype=bool)
    keep[:, 1:] = nids[:, 1:] != nids[:, :-1]
    counts = keep.sum(axis=1).astype(np.int64)
    stencil = np.full((n_cells, 27), -1, dtype=np.int64)
    rows = np.repeat(cells, counts)
    cols = (np.cumsum(keep, axis=1) - 1)[keep]
    stencil[rows, cols] = nids[keep]
    return stencil, counts


def build_cell_list(ps, box, r_cutoff):
    """Bin the particles of ps into cells of edge >= r_cutoff.

    Requires 0 < r_cutoff <= L/2 and wrapped positions.
    """
    L = box.edge_length
    r_cutoff = float(r_cutoff)
    if r_cutoff <= 0.0:
        raise ValueError(f"cutoff must be positive, got {r_cutoff}")
    if r_cutoff > box.max_cutoff():
        raise CutoffTooLargeError(
            f"cutoff {r_cutoff} exceeds L/2 = {box.max_cutoff()} "
            f"(minimum-image bound)"
        )
    pos = ps.position
    if pos.min() < 0.0 or pos.max() >= L:
        raise ValueError("positions must be wrapped into [0, L) before binning")

    cpd = int(np.floor(L / r_cutoff))
    cell_edge = L / cpd
    n_cells = cpd**3

    idx = np.floor(pos / cell_edge).astype(np.int64)
    np.clip(idx, 0, cpd - 1, out=idx)
    cell_of = idx[:, 0] + cpd * (idx[:, 1] + cpd * idx[:, 2])

    order = np.argsort(cell_of, kind="stable").astype(np.int64)
    counts = np.bincount(cell_of, minlength=n_cells)
    cell_start = np.zeros(n_cells + 1, dtype=np.int64)
    np.cumsum(counts, out=cell_start[1:])

    stencil, stencil_count = _build_stencil(cpd)
    return CellList(r_cutoff, cell_edge, cpd, cell_of, order, cell_start,
                    stencil, stencil_count)


def gather_pairs(cl, pos, L, i0, i1):
    """Vectorised ordered-pair enumeration for centres in [i0, i1).

    Returns (i_idx, j_idx, dx, dy, dz, r2) for all ordered pairs whose
    minimum-image separation is below the cell-list cutoff.  For a given
    centre the pair order is fixed by the stencil slot and the cell-sorted
    member order, independent of the block bounds.
    """
    rc2 = cl.r_cutoff**2
    sel = np.arange(i0, i1, dtype=np.int64)
    csel = cl.cell_of[sel]
    counts = np.diff(cl.cell_start)

    out = []
    for s in range(int(cl.stencil_count.max())):
        act_mask = cl.stencil_count[csel] > s
        act = sel[act_mask]
        if act.shape[0] == 0:
            continue
        nc = cl.stencil[cl.cell_of[act], s]
        cnt = counts[nc]
        total = int(cnt.sum())
        if total == 0:
            continue
        i_idx = np.repeat(act, cnt)
        ends = np.cumsum(cnt)
        j_ptr = (
            np.arange(total, dtype=np.int64)
            - np.repeat(ends - cnt, cnt)
            + np.repeat(cl.cell_start[nc], cnt)
        )
        j_idx = cl.order[j_ptr]

        keep = j_idx != i_idx
        i_idx = i_idx[keep]
        j_idx = j_idx[keep]
        d = pos[i_idx] - pos[j_idx]
        d -= L * np.floor(d / L + 0.5)
        r2 = np.einsum("ij,ij->i", d, d)
        keep = r2 < rc2
        out.append((i_idx[keep], j_idx[keep], d[keep, 0], d[keep, 1],
                    d[keep, 2], r2[keep]))

    if not out:
        z = np.zeros(0, dtype=np.int64)
        zf = np.zeros(0)
        return z, z, zf, zf, zf, zf
    cols = zip(*out)
    return tuple(np.concatenate(c) for c in cols)
