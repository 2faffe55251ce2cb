"""Slow, independent references used to validate the Ewald pipeline.

Everything here is single-threaded numpy, written for auditability rather
than speed, and deliberately shares no code with the production kernels.
"""

import math

import numpy as np
from scipy.special import erfc as _erfc

from .core import NeutralityError, OracleSizeError

_REFERENCE_MAX_N = 200


def _image_boxes(n_shells):
    """Integer image offsets |n|_inf <= n_shells with Evjen boundary weights.

    Boxes on the outermost shell count fractionally (faces 1/2, edges 1/4,
    corners 1/8) so every truncation shell is neutral on average.
    """
    rng = np.arange(-n_shells, n_shells + 1)
    nx, ny, nz = np.meshgrid(rng, rng, rng, indexing="ij")
    boxes = np.stack([nx.ravel(), ny.ravel(), nz.ravel()], axis=1)
    on_edge = (np.abs(boxes) == n_shells).sum(axis=1)
    weights = 0.5**on_edge
    return boxes, weights


def direct_lattice_sum(ps, box, n_shells):
    """Evjen-weighted direct image sum of the periodic Coulomb energy.

    Sums q_i q_j / |r_ij + L*n| over all ordered pairs and image boxes
    |n|_inf <= n_shells, including self-image terms (i == j, n != 0), with
    Evjen weights on the boundary shell.  Cube-ordered summation converges
    to the vacuum-boundary value, which exceeds the Ewald (tinfoil) energy
    by 2*pi*|M|^2/(3V) for box dipole M = sum q_i r_i; that surface term is
    subtracted so the result is directly comparable to the Ewald total.
    """
    n_shells = int(n_shells)
    if n_shells < 1:
        raise ValueError(f"n_shells must be >= 1, got {n_shells}")
    ps.require_neutral()

    L = box.edge_length
    pos = ps.position
    q = ps.charge
    n = ps.count
    d0 = pos[:, None, :] - pos[None, :, :]
    qq = np.outer(q, q)
    diag = np.eye(n, dtype=bool)

    boxes, weights = _image_boxes(n_shells)
    u = 0.0
    for nvec, w in zip(boxes, weights):
        d = d0 + L * nvec
        r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        if not nvec.any():
            r[diag] = np.inf
        u += 0.5 * w * float((qq / r).sum())

    dipole = q @ pos
    u -= 2.0 * math.pi * float(dipole @ dipole) / (3.0 * box.volume)
    return u


def _real_space_reference(pos, q, L, alpha):
    """erfc-screened pair sum over the home box plus one image shell."""
    n = pos.shape[0]
    sqrt_alpha = math.sqrt(alpha)
    tsap = 2.0 * math.sqrt(alpha / math.pi)
    d0 = pos[:, None, :] - pos[None, :, :]
    qq = np.outer(q, q)
    diag = np.eye(n, dtype=bool)

    u = 0.0
    forces = np.zeros((n, 3))
    for nx in (-1, 0, 1):
        for ny in (-1, 0, 1):
            for nz in (-1, 0, 1):
                d = d0 + L * np.array([nx, ny, nz], dtype=float)
                r2 = np.einsum("ijk,ijk->ij", d, d)
                if nx == 0 and ny == 0 and nz == 0:
                    r2[diag] = np.inf
                r = np.sqrt(r2)
                sc = _erfc(sqrt_alpha * r) / r
                u += 0.5 * float((qq * sc).sum())
                g = qq * (sc + tsap * np.exp(-alpha * r2)) / r2
                forces += np.einsum("ij,ijk->ik", g, d)
    return u, forces


def _full_kspace(L, k_cutoff):
    """All nonzero integer modes with |k| < k_cutoff (no half-space folding)."""
    bound = k_cutoff * L / (2.0 * math.pi)
    mmax = int(math.floor(bound))
    rng = np.arange(-mmax, mmax + 1)
    mx, my, mz = np.meshgrid(rng, rng, rng, indexing="ij")
    m = np.stack([mx.ravel(), my.ravel(), mz.ravel()], axis=1)
    m2 = np.einsum("ij,ij->i", m, m)
    return (2.0 * math.pi / L) * m[(m2 > 0) & (m2 < bound * bound)].astype(float)


def reciprocal_sum_complex(pos, q, L, alpha, k_cutoff):
    """Naive complex k-sum (1/2) sum_k C_k rho_k rho_-k and its forces.

    Returns (u_complex, forces); the imaginary residue of u_complex measures
    how exactly Hermitian cancellation holds.
    """
    kvec = _full_kspace(L, k_cutoff)
    volume = L**3
    k2 = np.einsum("ij,ij->i", kvec, kvec)
    coeff = (4.0 * math.pi / (volume * k2)) * np.exp(-k2 / (4.0 * alpha))

    phase = kvec @ pos.T  # (N_k, N)
    a = np.exp(1j * phase)  # A_{j,k} transposed
    rho = a.conj() @ q  # rho_k = sum_j q_j exp(-i k.r_j)
    rho_m = a @ q  # rho_{-k} computed independently

    u = 0.5 * complex((coeff * rho * rho_m).sum())
    im_arho = (a * rho[:, None]).imag  # Im(A_{j,k} rho_k), (N_k, N)
    forces = q[:, None] * np.einsum("kj,ki->ji", coeff[:, None] * im_arho, kvec)
    return u, forces


def direct_ewald_reference(ps, box, alpha, epsilon=1e-6):
    """Tight-truncation Ewald evaluation without cell lists or symmetry tricks.

    Real space runs over all pairs with the home box plus one image shell and
    no cutoff; the k-sum uses twice the k_cutoff that parameter selection
    would pair with alpha at this tolerance.  Guarded to N <= 200.
    """
    ps.require_neutral()
    if ps.count > _REFERENCE_MAX_N:
        raise OracleSizeError(
            f"direct Ewald reference is O(N^2 + N*N_k); N = {ps.count} "
            f"exceeds the {_REFERENCE_MAX_N} guard"
        )
    L = box.edge_length
    pos = ps.position
    q = ps.charge

    u_sr, f_sr = _real_space_reference(pos, q, L, alpha)
    s = math.sqrt(-math.log(epsilon))
    k_cutoff = 2.0 * (2.0 * s * math.sqrt(alpha))
    u_lr, f_lr = reciprocal_sum_complex(pos, q, L, alpha, k_cutoff)
    u_self = -math.sqrt(alpha / math.pi) * float(q @ q)

    return u_sr + u_lr.real + u_self, f_sr + f_lr


def finite_difference_forces(energy_fn, ps, h):
    """Central-difference force estimate -dU/dr per particle and axis.

    energy_fn(ps) must evaluate the energy for the current ps.position;
    positions are displaced by +-h one component at a time (rewrapped so
    periodic evaluators stay in-domain) and restored exactly.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError(f"step h must lie in [1e-6, 1e-2] A, got {h}")
    L = ps.box.edge_length
    pos = ps.position
    forces = np.zeros((ps.count, 3))
    for i in range(ps.count):
        for a in range(3):
            orig = pos[i, a]
            pos[i, a] = (orig + h) % L
            u_plus = energy_fn(ps)
            pos[i, a] = (orig - h) % L
            u_minus = energy_fn(ps)
            pos[i, a] = orig
            forces[i, a] = -(u_plus - u_minus) / (2.0 * h)
    return forces
