"""Ewald decomposition of the periodic Coulomb interaction.

The conditionally convergent lattice sum is split by a Gaussian screen of
inverse-square width alpha into a short-range erfc part evaluated with a
cutoff pair loop, a reciprocal-space part evaluated over wave vectors
k = (2*pi/L)*m below k_c, and a constant self-energy.  All three pieces run
as kernels under the loop engine; per-particle phase factors exp(i k. r) are
generated by complex recurrence from the three axis phases instead of per-k
trigonometric calls.

Energies are in q^2/A, forces in q^2/A^2 (Coulomb constant 1).
"""

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc as _erfc

from . import backend
from .backend import HAVE_NUMBA
from .celllist import build_cell_list
from .core import (
    INC,
    INC_ZERO,
    READ,
    BoxTooSmallError,
    CoincidentParticlesError,
    GlobalAccumulator,
    KSpaceEmptyError,
    OracleSizeError,
)
from .engine import Kernel, PairLoop, ParticleLoop

if HAVE_NUMBA:
    from numba import njit


@dataclass(frozen=True)
class EwaldParams:
    """Tuned splitting parameter and cutoffs for one tolerance.

    alpha is the Gaussian screen parameter (A^-2), r_cutoff the real-space
    cutoff (A), k_cutoff the reciprocal cutoff (A^-1) and tolerance the
    target relative truncation error for both sums.
    """

    alpha: float
    r_cutoff: float
    k_cutoff: float
    tolerance: float

    def truncation_errors(self):
        """(real-space, reciprocal) truncation measures compared to tolerance."""
        real = _erfc(math.sqrt(self.alpha) * self.r_cutoff) / self.r_cutoff
        recip = math.exp(-self.k_cutoff**2 / (4.0 * self.alpha))
        return float(real), float(recip)

    def validate(self):
        real, recip = self.truncation_errors()
        #...r_cutoff carries 1/A units; criterion compares against eps * 1/A
        if real > self.tolerance * (1.0 + 1e-12):
            raise ValueError(
                f"real-space truncation {real:.3e} exceeds tolerance "
                f"{self.tolerance:.3e}"
            )
        if recip > self.tolerance * (1.0 + 1e-12):
            raise ValueError(
                f"reciprocal truncation {recip:.3e} exceeds tolerance "
                f"{self.tolerance:.3e}"
            )


#: Work-balance constant in alpha = C * (n/V^2)^(1/3).  Pure operation-count
#: balancing (equal pair and mode counts) gives pi; one screened pair
#: evaluation (erfc + exp) costs an order of magnitude more than one
#: reciprocal-mode update, and the runtime optimum scales with the cube root
#: of that cost ratio, so the real-space cutoff is bought down by ~sqrt(2).
BALANCE_CONSTANT = 2.0 * math.pi


def choose_parameters(n, box, epsilon, alpha=None, r_cutoff=None):
    """Select (alpha, r_c, k_c) meeting the tolerance for n particles in box.

    Both exponential tails are pinned to epsilon through s = sqrt(-ln eps):
    r_c = s/sqrt(alpha) and k_c = 2*s*sqrt(alpha).  Without overrides alpha
    follows the cost-weighted work-balancing optimum
    alpha = BALANCE_CONSTANT*(n/V^2)^(1/3); when the implied r_c exceeds the
    minimum-image bound L/2 it is clamped to L/2 and alpha is re-derived so
    the real-space tail still meets the tolerance.  An explicit alpha
    override is honoured exactly and never clamped, so the returned r_cutoff
    may exceed L/2; such parameter sets cannot be used with a minimum-image
    cell list (the solver switches to an image-shell real-space sum).
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"need at least two particles, got {n}")
    if not 1e-12 < epsilon < 1.0:
        raise ValueError(f"tolerance must lie in (1e-12, 1), got {epsilon}")
    if alpha is not None and r_cutoff is not None:
        raise ValueError("override either alpha or r_cutoff, not both")

    L = box.edge_length
    s = math.sqrt(-math.log(epsilon))

    if alpha is not None:
        alpha = float(alpha)
        if alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        r_c = s / math.sqrt(alpha)
    else:
        if r_cutoff is not None:
            r_c = float(r_cutoff)
            if r_c <= 0.0:
                raise ValueError(f"r_cutoff must be positive, got {r_c}")
            if r_c > box.max_cutoff():
                r_c = box.max_cutoff()
        else:
            alpha = BALANCE_CONSTANT * (n / box.volume**2) ** (1.0 / 3.0)
            r_c = s / math.sqrt(alpha)
            if r_c > box.max_cutoff():
                r_c = box.max_cutoff()
        alpha = (s / r_c) ** 2

    k_c = 2.0 * s * math.sqrt(alpha)
    params = EwaldParams(alpha=alpha, r_cutoff=r_c, k_cutoff=k_c,
                         tolerance=float(epsilon))
    try:
        params.validate()
    except ValueError as err:
        raise BoxTooSmallError(
            f"no parameters meet tolerance {epsilon:.1e} in a box of edge "
            f"{L} A: {err}"
        ) from err
    return params


class ReciprocalSpace:
    """Half-space k-vector table with coefficients and the density rho_hat.

    The full mode set {k = (2*pi/L)*m : 0 < |k| < k_c} is closed under
    k <-> -k; only the lexicographically positive half is stored and real
    contributions are doubled where the mirror mode would contribute, using
    rho_hat(-k) = conj(rho_hat(k)).  ``count`` reports the full mode count
    N_k; ``n_stored`` the stored half.  rho_hat lives in a GlobalAccumulator
    as n_stored reals followed by n_stored imaginaries.
    """

    def __init__(self, box, params, m_int):
        L = box.edge_length
        self.box = box
        self.params = params
        self.m_int = m_int
        self.n_stored = m_int.shape[0]
        self.count = 2 * self.n_stored
        self.kvec = (2.0 * math.pi / L) * m_int.astype(float)
        k2 = np.einsum("ij,ij->i", self.kvec, self.kvec)
        self.coeff = (4.0 * math.pi / (box.volume * k2)) * np.exp(
            -k2 / (4.0 * params.alpha)
        )
        self.m_abs = np.abs(m_int).astype(np.int64)
        self.m_sign = np.where(m_int < 0, -1.0, 1.0)
        self.mmax = int(self.m_abs.max())
        self.rho = GlobalAccumulator(2 * self.n_stored)
        # int metadata handed to kernels: [n_stored, mmax]
        self.dims = np.array([self.n_stored, self.mmax], dtype=np.int64)
        self.phase_step = np.array([2.0 * math.pi / L])

    @property
    def rho_complex(self):
        nk = self.n_stored
        return self.rho.values[:nk] + 1j * self.rho.values[nk:]


def enumerate_kvectors(box, params):
    """Build the ReciprocalSpace for params, zeroing rho_hat.

    Raises KSpaceEmptyError when no nonzero mode lies below k_cutoff.
    """
    L = box.edge_length
    bound = params.k_cutoff * L / (2.0 * math.pi)
    mmax = int(math.floor(bound))
    if mmax < 1:
        raise KSpaceEmptyError(
            f"k_cutoff {params.k_cutoff:.4g} admits no reciprocal vector for "
            f"box edge {L} (need k_cutoff > 2*pi/L = {2.0 * math.pi / L:.4g})"
        )
    rng = np.arange(-mmax, mmax + 1)
    mx, my, mz = np.meshgrid(rng, rng, rng, indexing="ij")
    m = np.stack([mx.ravel(), my.ravel(), mz.ravel()], axis=1)
    m2 = np.einsum("ij,ij->i", m, m)
    below = (m2 > 0) & (m2 < bound * bound)
    # lexicographically positive half: first nonzero of (z, y, x) is positive
    z, y, x = m[:, 2], m[:, 1], m[:, 0]
    half = (z > 0) | ((z == 0) & (y > 0)) | ((z == 0) & (y == 0) & (x > 0))
    m = m[below & half]
    if m.shape[0] == 0:
        raise KSpaceEmptyError(
            f"k_cutoff {params.k_cutoff:.4g} admits no reciprocal vector"
        )
    return ReciprocalSpace(box, params, m.astype(np.int64))


# ---------------------------------------------------------------------------
# kernels

def _sr_body(i, j, dx, dy, dz, r2, dats, gread, ginc):
    q = dats[0]
    f = dats[1]
    c = gread[0]
    if r2 == 0.0:
        raise CoincidentParticlesError("coincident particles in Coulomb kernel")
    qq = q[i] * q[j]
    r = math.sqrt(r2)
    sc = math.erfc(c[0] * r) / r
    ginc[0][0] += 0.5 * qq * sc
    g = qq * (sc + c[2] * math.exp(-c[1] * r2)) / r2
    f[i, 0] += g * dx
    f[i, 1] += g * dy
    f[i, 2] += g * dz


def _sr_vbody(i_idx, j_idx, dx, dy, dz, r2, dats, gread, ginc):
    q = dats[0]
    f = dats[1]
    c = gread[0]
    if r2.shape[0] == 0:
        return
    if r2.min() == 0.0:
        raise CoincidentParticlesError("coincident particles in Coulomb kernel")
    qq = q[i_idx] * q[j_idx]
    r = np.sqrt(r2)
    sc = _erfc(c[0] * r) / r
    ginc[0][0] += 0.5 * float(qq @ sc)
    g = qq * (sc + c[2] * np.exp(-c[1] * r2)) / r2
    n = f.shape[0]
    f[:, 0] += np.bincount(i_idx, weights=g * dx, minlength=n)
    f[:, 1] += np.bincount(i_idx, weights=g * dy, minlength=n)
    f[:, 2] += np.bincount(i_idx, weights=g * dz, minlength=n)


def coulomb_short_range_kernel(params):
    """Pair kernel for the screened real-space Coulomb energy and force.

    Binds (charge READ, force INC); globals (constants READ, u_sr INC_ZERO).
    Ordered-pair convention: the energy carries an explicit factor 1/2.
    """
    alpha = params.alpha
    consts = np.array([math.sqrt(alpha), alpha,
                       2.0 * math.sqrt(alpha / math.pi)])
    kern = Kernel(
        "coulomb_short_range",
        _sr_body,
        dats=(("charge", READ), ("force", INC)),
        glob=(READ, INC_ZERO),
        vbody=_sr_vbody,
    )
    return kern, consts


@backend.jit_helper
def _phase_tables(i, pos, step, mmax):
    """cos/sin of m*(2*pi/L)*r_i for m = 0..mmax on each axis (scalar path)."""
    ct = np.empty((3, mmax + 1))
    st = np.empty((3, mmax + 1))
    for a in range(3):
        th = step * pos[i, a]
        cb = math.cos(th)
        sb = math.sin(th)
        ct[a, 0] = 1.0
        st[a, 0] = 0.0
        for m in range(1, mmax + 1):
            cp = ct[a, m - 1]
            sp = st[a, m - 1]
            ct[a, m] = cp * cb - sp * sb
            st[a, m] = sp * cb + cp * sb
    return ct, st


def _rho_body(i, dats, gread, ginc):
    pos = dats[0]
    q = dats[1]
    step = gread[0][0]
    dims = gread[1]
    mabs = gread[2]
    msgn = gread[3]
    nk = dims[0]
    rho = ginc[0]
    qi = q[i]
    ct, st = _phase_tables(i, pos, step, dims[1])
    for kk in range(nk):
        cx = ct[0, mabs[kk, 0]]
        sx = msgn[kk, 0] * st[0, mabs[kk, 0]]
        cy = ct[1, mabs[kk, 1]]
        sy = msgn[kk, 1] * st[1, mabs[kk, 1]]
        cz = ct[2, mabs[kk, 2]]
        sz = msgn[kk, 2] * st[2, mabs[kk, 2]]
        cxy = cx * cy - sx * sy
        sxy = sx * cy + cx * sy
        cre = cxy * cz - sxy * sz
        sim = sxy * cz + cxy * sz
        # rho_k += q_i * conj(A_ik)
        rho[kk] += qi * cre
        rho[nk + kk] -= qi * sim


def _lr_body(i, dats, gread, ginc):
    pos = dats[0]
    q = dats[1]
    f = dats[2]
    step = gread[0][0]
    dims = gread[1]
    mabs = gread[2]
    msgn = gread[3]
    kvec = gread[4]
    coeff = gread[5]
    rho = gread[6]
    nk = dims[0]
    qi = q[i]
    ct, st = _phase_tables(i, pos, step, dims[1])
    u = 0.0
    fx = 0.0
    fy = 0.0
    fz = 0.0
    for kk in range(nk):
        cx = ct[0, mabs[kk, 0]]
        sx = msgn[kk, 0] * st[0, mabs[kk, 0]]
        cy = ct[1, mabs[kk, 1]]
        sy = msgn[kk, 1] * st[1, mabs[kk, 1]]
        cz = ct[2, mabs[kk, 2]]
        sz = msgn[kk, 2] * st[2, mabs[kk, 2]]
        cxy = cx * cy - sx * sy
        sxy = sx * cy + cx * sy
        cre = cxy * cz - sxy * sz
        sim = sxy * cz + cxy * sz
        rr = rho[kk]
        ri = rho[nk + kk]
        re_arho = cre * rr - sim * ri
        im_arho = cre * ri + sim * rr
        u += coeff[kk] * re_arho
        w = 2.0 * coeff[kk] * im_arho
        fx += w * kvec[kk, 0]
        fy += w * kvec[kk, 1]
        fz += w * kvec[kk, 2]
    ginc[0][0] += qi * u
    f[i, 0] += qi * fx
    f[i, 1] += qi * fy
    f[i, 2] += qi * fz


_K_CHUNK = 512
_P_CHUNK = 2048


def _block_phase_tables(pos, i0, i1, step, mmax):
    """Per-particle complex phase tables for one block (vector path)."""
    base = np.exp(1j * step * pos[i0:i1])  # (nb, 3)
    tabs = []
    for a in range(3):
        t = np.empty((i1 - i0, mmax + 1), dtype=np.complex128)
        t[:, 0] = 1.0
        for m in range(1, mmax + 1):
            t[:, m] = t[:, m - 1] * base[:, a]
        tabs.append(t)
    return tabs


def _gathered_modes(tabs, mabs, msgn, sl):
    ax = tabs[0][:, mabs[sl, 0]]
    ay = tabs[1][:, mabs[sl, 1]]
    az = tabs[2][:, mabs[sl, 2]]
    ax = ax.real + 1j * (msgn[sl, 0] * ax.imag)
    ay = ay.real + 1j * (msgn[sl, 1] * ay.imag)
    az = az.real + 1j * (msgn[sl, 2] * az.imag)
    return ax * ay * az


def _rho_vbody(i0, i1, dats, gread, ginc):
    pos = dats[0]
    q = dats[1]
    step = gread[0][0]
    dims = gread[1]
    mabs = gread[2]
    msgn = gread[3]
    nk = int(dims[0])
    rho = ginc[0]
    for p0 in range(i0, i1, _P_CHUNK):
        p1 = min(p0 + _P_CHUNK, i1)
        tabs = _block_phase_tables(pos, p0, p1, step, int(dims[1]))
        qb = q[p0:p1]
        for k0 in range(0, nk, _K_CHUNK):
            sl = slice(k0, min(k0 + _K_CHUNK, nk))
            a = _gathered_modes(tabs, mabs, msgn, sl)
            rho[sl] += qb @ a.real
            rho[nk + k0:nk + sl.stop] -= qb @ a.imag


def _lr_vbody(i0, i1, dats, gread, ginc):
    pos = dats[0]
    q = dats[1]
    f = dats[2]
    step = gread[0][0]
    dims = gread[1]
    mabs = gread[2]
    msgn = gread[3]
    kvec = gread[4]
    coeff = gread[5]
    rho = gread[6]
    nk = int(dims[0])
    u = 0.0
    for p0 in range(i0, i1, _P_CHUNK):
        p1 = min(p0 + _P_CHUNK, i1)
        tabs = _block_phase_tables(pos, p0, p1, step, int(dims[1]))
        qb = q[p0:p1]
        ub = np.zeros(p1 - p0)
        fb = np.zeros((p1 - p0, 3))
        for k0 in range(0, nk, _K_CHUNK):
            sl = slice(k0, min(k0 + _K_CHUNK, nk))
            a = _gathered_modes(tabs, mabs, msgn, sl)
            rr = rho[sl]
            ri = rho[nk + k0:nk + sl.stop]
            re_arho = a.real * rr - a.imag * ri
            im_arho = a.real * ri + a.imag * rr
            ub += re_arho @ coeff[sl]
            w = 2.0 * coeff[sl]
            fb += im_arho @ (kvec[sl] * w[:, None])
        u += float(qb @ ub)
        f[p0:p1] += qb[:, None] * fb
    ginc[0][0] += u


def rho_hat_kernel():
    """Particle kernel accumulating rho_hat(k) = sum_j q_j exp(-i k.r_j)."""
    return Kernel(
        "reciprocal_density",
        _rho_body,
        dats=(("position", READ), ("charge", READ)),
        glob=(READ, READ, READ, READ, INC_ZERO),
        vbody=_rho_vbody,
        fastmath=True,  # pure multiply-add stream, no cutoff predicates
    )


def long_range_kernel():
    """Particle kernel turning rho_hat into u_lr and per-particle forces."""
    return Kernel(
        "reciprocal_force_energy",
        _lr_body,
        dats=(("position", READ), ("charge", READ), ("force", INC)),
        glob=(READ, READ, READ, READ, READ, READ, READ, INC_ZERO),
        vbody=_lr_vbody,
        fastmath=True,
    )


def compute_rho_hat(ps, rs, workers=None):
    """Fill rs.rho with the reciprocal charge density of ps (ParticleLoop I)."""
    loop = ParticleLoop(
        rho_hat_kernel(),
        (rs.phase_step, rs.dims, rs.m_abs, rs.m_sign, rs.rho),
    )
    loop.execute(ps, workers=workers)
    return rs


def long_range_energy_forces(ps, rs, workers=None):
    """Accumulate reciprocal-space forces into ps.force; return u_lr.

    Requires rs.rho computed for the current positions (ParticleLoop II).
    """
    u_lr = GlobalAccumulator(1)
    loop = ParticleLoop(
        long_range_kernel(),
        (rs.phase_step, rs.dims, rs.m_abs, rs.m_sign, rs.kvec, rs.coeff,
         rs.rho, u_lr),
    )
    loop.execute(ps, workers=workers)
    return u_lr.scalar


def self_energy(ps, params):
    """Gaussian-screen self-interaction, -sqrt(alpha/pi) * sum q_i^2."""
    return -math.sqrt(params.alpha / math.pi) * float(ps.charge @ ps.charge)


# ---------------------------------------------------------------------------
# wide-cutoff real-space path (r_cutoff > L/2, validation scale only)

_WIDE_CUTOFF_MAX_N = 4096

if HAVE_NUMBA:

    @njit(nogil=True)
    def _sr_wide_jit(pos, q, f, L, rc2, sqrt_alpha, alpha, tsap):
        n = pos.shape[0]
        u = 0.0
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                for nx in range(-1, 2):
                    for ny in range(-1, 2):
                        for nz in range(-1, 2):
                            dx = pos[i, 0] - pos[j, 0] + L * nx
                            dy = pos[i, 1] - pos[j, 1] + L * ny
                            dz = pos[i, 2] - pos[j, 2] + L * nz
                            r2 = dx * dx + dy * dy + dz * dz
                            if r2 >= rc2:
                                continue
                            if r2 == 0.0:
                                raise CoincidentParticlesError(
                                    "coincident particles in Coulomb kernel"
                                )
                            qq = q[i] * q[j]
                            r = math.sqrt(r2)
                            sc = math.erfc(sqrt_alpha * r) / r
                            u += 0.5 * qq * sc
                            g = qq * (sc + tsap * math.exp(-alpha * r2)) / r2
                            f[i, 0] += g * dx
                            f[i, 1] += g * dy
                            f[i, 2] += g * dz
        return u


def _sr_wide_numpy(pos, q, f, L, rc2, sqrt_alpha, alpha, tsap):
    n = pos.shape[0]
    shifts = L * np.array(
        [(x, y, z) for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (-1, 0, 1)]
    )
    u = 0.0
    for i in range(n):
        d = pos[i][None, None, :] - pos[None, :, :] + shifts[:, None, :]
        r2 = np.einsum("sjk,sjk->sj", d, d)
        r2[:, i][r2[:, i] == 0.0] = np.inf  # drop the n=0 self term
        mask = r2 < rc2
        if not mask.any():
            continue
        if r2[mask].min() == 0.0:
            raise CoincidentParticlesError(
                "coincident particles in Coulomb kernel"
            )
        r2m = r2[mask]
        qq = q[i] * np.broadcast_to(q, r2.shape)[mask]
        r = np.sqrt(r2m)
        sc = _erfc(sqrt_alpha * r) / r
        u += 0.5 * float(qq @ sc)
        g = qq * (sc + tsap * np.exp(-alpha * r2m)) / r2m
        f[i] += (g[:, None] * d[mask]).sum(axis=0)
    return u


def short_range_wide_cutoff(ps, params):
    """Real-space sum over nearest plus first image shell for r_c > L/2.

    Accumulates forces into ps.force and returns u_sr.  Used when honouring
    an explicit alpha override whose tolerance-implied r_cutoff exceeds the
    minimum-image bound; O(27 N^2), guarded to small systems.
    """
    L = ps.box.edge_length
    if params.r_cutoff > L:
        raise BoxTooSmallError(
            f"r_cutoff {params.r_cutoff:.3g} exceeds the box edge {L}; a "
            f"single image shell no longer covers the interaction range"
        )
    if ps.count > _WIDE_CUTOFF_MAX_N:
        raise OracleSizeError(
            f"wide-cutoff real-space path is O(N^2); N = {ps.count} exceeds "
            f"the {_WIDE_CUTOFF_MAX_N} guard"
        )
    alpha = params.alpha
    args = (ps.position, ps.charge, ps.force, L, params.r_cutoff**2,
            math.sqrt(alpha), alpha, 2.0 * math.sqrt(alpha / math.pi))
    if backend.get_backend() == "numba":
        return float(_sr_wide_jit(*args))
    return float(_sr_wide_numpy(*args))


# ---------------------------------------------------------------------------
# assembly

@dataclass
class EwaldEnergies:
    """Energy breakdown and per-component wall times of one evaluation."""

    u_sr: float
    u_lr: float
    u_self: float
    t_cell: float = 0.0
    t_sr: float = 0.0
    t_alg1: float = 0.0
    t_alg2: float = 0.0

    @property
    def total(self):
        return self.u_sr + self.u_lr + self.u_self


class EwaldSolver:
    """Reusable Coulomb evaluator for one box and parameter set.

    Owns the reciprocal-space table and the three loop objects so repeated
    per-step evaluations pay no setup cost.  Forces accumulate into
    ps.force; the caller zeroes them when starting a fresh assembly.
    """

    def __init__(self, box, params, workers=None, recip=None):
        self.box = box
        self.params = params
        self.workers = workers
        self.recip = enumerate_kvectors(box, params) if recip is None else recip
        self.wide_cutoff = params.r_cutoff > box.max_cutoff()

        sr_kernel, self._sr_consts = coulomb_short_range_kernel(params)
        self._u_sr = GlobalAccumulator(1)
        self._u_lr = GlobalAccumulator(1)
        self._sr_loop = PairLoop(sr_kernel, (self._sr_consts, self._u_sr))
        rs = self.recip
        self._rho_loop = ParticleLoop(
            rho_hat_kernel(),
            (rs.phase_step, rs.dims, rs.m_abs, rs.m_sign, rs.rho),
        )
        self._lr_loop = ParticleLoop(
            long_range_kernel(),
            (rs.phase_step, rs.dims, rs.m_abs, rs.m_sign, rs.kvec, rs.coeff,
             rs.rho, self._u_lr),
        )

    def evaluate(self, ps, cell_list=None):
        """Accumulate Coulomb forces into ps.force; return EwaldEnergies."""
        ps.require_neutral()
        out = EwaldEnergies(0.0, 0.0, self_energy(ps, self.params))

        t0 = time.perf_counter()
        if self.wide_cutoff:
            out.u_sr = short_range_wide_cutoff(ps, self.params)
            t1 = t0
        else:
            if cell_list is None:
                cell_list = build_cell_list(ps, self.box, self.params.r_cutoff)
            t1 = time.perf_counter()
            self._sr_loop.execute(ps, cell_list, workers=self.workers)
            out.u_sr = self._u_sr.scalar
        t2 = time.perf_counter()
        self._rho_loop.execute(ps, workers=self.workers)
        t3 = time.perf_counter()
        self._lr_loop.execute(ps, workers=self.workers)
        t4 = time.perf_counter()
        out.u_lr = self._u_lr.scalar

        out.t_cell = t1 - t0
        out.t_sr = t2 - t1 + out.t_cell
        out.t_alg1 = t3 - t2
        out.t_alg2 = t4 - t3
        return out


def total_coulomb(ps, params, rs=None, cell_list=None, workers=None):
    """Full Ewald energy of a neutral system; forces accumulate into ps.

    Returns U = u_sr + u_lr + u_self.  ``rs`` may carry a pre-enumerated
    reciprocal space for the same box and parameters.
    """
    solver = EwaldSolver(ps.box, params, workers=workers, recip=rs)
    return solver.evaluate(ps, cell_list).total
