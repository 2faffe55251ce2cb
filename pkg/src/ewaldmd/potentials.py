"""Auxiliary short-range pair kernels (truncated Lennard-Jones).

The 12-6 interaction is energy-shifted so U(r_cutoff) = 0; forces are left
untouched by the shift, so the force field is the bare 12-6 gradient inside
the cutoff.  Defaults keep ions apart at the benchmark density: sigma equal
to the 2.5 A density length scale, unit well depth, cutoff 2.5*sigma.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import INC, INC_ZERO, READ, CoincidentParticlesError
from .engine import Kernel

DEFAULT_SIGMA = 2.5
DEFAULT_EPSILON = 1.0


@dataclass(frozen=True)
class LJParams:
    epsilon_lj: float = DEFAULT_EPSILON
    sigma: float = DEFAULT_SIGMA
    r_cutoff_lj: float = 2.5 * DEFAULT_SIGMA

    def energy_shift(self):
        """Unshifted 12-6 energy at the cutoff, subtracted inside it."""
        s6 = (self.sigma / self.r_cutoff_lj) ** 6
        return 4.0 * self.epsilon_lj * (s6 * s6 - s6)


def _lj_body(i, j, dx, dy, dz, r2, dats, gread, ginc):
    f = dats[0]
    c = gread[0]
    if r2 == 0.0:
        raise CoincidentParticlesError("coincident particles in LJ kernel")
    s2 = c[0] / r2
    s6 = s2 * s2 * s2
    s12 = s6 * s6
    ginc[0][0] += 0.5 * (c[1] * (s12 - s6) - c[2])
    g = c[3] * (2.0 * s12 - s6) / r2
    f[i, 0] += g * dx
    f[i, 1] += g * dy
    f[i, 2] += g * dz


def _lj_vbody(i_idx, j_idx, dx, dy, dz, r2, dats, gread, ginc):
    f = dats[0]
    c = gread[0]
    if r2.shape[0] == 0:
        return
    if r2.min() == 0.0:
        raise CoincidentParticlesError("coincident particles in LJ kernel")
    s6 = (c[0] / r2) ** 3
    s12 = s6 * s6
    ginc[0][0] += 0.5 * float((c[1] * (s12 - s6) - c[2]).sum())
    g = c[3] * (2.0 * s12 - s6) / r2
    n = f.shape[0]
    f[:, 0] += np.bincount(i_idx, weights=g * dx, minlength=n)
    f[:, 1] += np.bincount(i_idx, weights=g * dy, minlength=n)
    f[:, 2] += np.bincount(i_idx, weights=g * dz, minlength=n)


def lj_kernel(params):
    """Pair kernel for the shifted 12-6 energy and force.

    Binds (force INC); globals (constants READ, u_lj INC_ZERO).  Energy
    carries the ordered-pair factor 1/2; the pair loop's cutoff must equal
    params.r_cutoff_lj for the shift to cancel at the boundary.
    """
    consts = np.array([
        params.sigma**2,
        4.0 * params.epsilon_lj,
        params.energy_shift(),
        24.0 * params.epsilon_lj,
    ])
    kern = Kernel(
        "lennard_jones",
        _lj_body,
        dats=(("force", INC),),
        glob=(READ, INC_ZERO),
        vbody=_lj_vbody,
    )
    return kern, consts


def lj_pair_energy(r, params):
    """Shifted pair energy at separation r (reference for tests)."""
    s6 = (params.sigma / r) ** 6
    return 4.0 * params.epsilon_lj * (s6 * s6 - s6) - params.energy_shift()


def lj_pair_force(r, params):
    """Radial force magnitude -dU/dr at separation r (positive = repulsive)."""
    s6 = (params.sigma / r) ** 6
    return 24.0 * params.epsilon_lj * (2.0 * s6 * s6 - s6) / r


def wca_cutoff(sigma=DEFAULT_SIGMA):
    """Cutoff at the 12-6 minimum, giving the purely repulsive regime."""
    return 2.0 ** (1.0 / 6.0) * sigma
