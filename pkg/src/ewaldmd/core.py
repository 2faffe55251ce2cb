"""Particle storage, periodic box, global accumulators and access modes.

Units are Gaussian electrostatic units with the Coulomb constant set to 1:
charges in elementary-charge units, lengths in Angstrom, energies in q^2/A
and forces in q^2/A^2.  Per-particle properties are stored as one contiguous
numpy array per property (structure of arrays).
"""

import enum

import numpy as np


class EwaldmdError(Exception):
    """Base class for package errors."""


class CutoffTooLargeError(EwaldmdError):
    """Cutoff exceeds L/2, incompatible with the minimum-image convention."""


class ContractViolationError(EwaldmdError):
    """A kernel touched data in a way its access descriptors forbid."""


class CoincidentParticlesError(EwaldmdError):
    """Two charged particles at zero separation (physical singularity)."""


class KSpaceEmptyError(EwaldmdError):
    """No reciprocal vectors below the cutoff; k_c too small for the box."""


class BoxTooSmallError(EwaldmdError):
    """No feasible Ewald parameters exist for this box at the tolerance."""


class NeutralityError(EwaldmdError):
    """Operation requires a charge-neutral system."""


class OracleSizeError(EwaldmdError):
    """System too large for a brute-force reference evaluation."""


class LatticeError(EwaldmdError):
    """Requested lattice geometry cannot close with alternating charges."""


class ConfigError(EwaldmdError):
    """Malformed configuration file; message carries the line number."""


class XYZFormatError(EwaldmdError):
    """Malformed extended-XYZ particle file."""


class Access(enum.Enum):
    """How a kernel parameter touches its target data."""

    READ = "read"
    INC = "inc"
    INC_ZERO = "inc_zero"


READ = Access.READ
INC = Access.INC
INC_ZERO = Access.INC_ZERO

#: Absolute bound on |sum q_i| for a system to count as neutral.
NEUTRALITY_TOL = 1e-12


class SimulationBox:
    """Cubic periodic domain of edge length L (Angstrom)."""

    __slots__ = ("edge_length", "volume")

    def __init__(self, edge_length):
        edge_length = float(edge_length)
        if not edge_length > 0.0:
            raise ValueError(f"box edge length must be positive, got {edge_length}")
        self.edge_length = edge_length
        self.volume = edge_length**3

    def __repr__(self):
        return f"SimulationBox(edge_length={self.edge_length})"

    def max_cutoff(self):
        """Largest cutoff usable with the minimum-image convention."""
        return 0.5 * self.edge_length


class ParticleSet:
    """Per-particle property arrays with a shared leading dimension N.

    Properties: ``position`` (N,3), ``charge`` (N,), ``force`` (N,3),
    ``velocity`` (N,3), ``mass`` (N,).  Kernels bind these by name through
    access descriptors; the loop engine hands workers exclusive write access
    per particle index, so arrays themselves carry no locking.
    """

    PROPERTIES = ("position", "charge", "force", "velocity", "mass")

    def __init__(self, n, box):
        n = int(n)
        if n < 1:
            raise ValueError(f"particle count must be >= 1, got {n}")
        self.count = n
        self.box = box
        self.position = np.zeros((n, 3))
        self.charge = np.zeros(n)
        self.force = np.zeros((n, 3))
        self.velocity = np.zeros((n, 3))
        self.mass = np.ones(n)

    def property_array(self, name):
        if name not in self.PROPERTIES:
            raise KeyError(f"unknown particle property {name!r}")
        return getattr(self, name)

    def validate(self):
        """Audit the length and shape invariants of every property array."""
        n = self.count
        for name in self.PROPERTIES:
            arr = getattr(self, name)
            if arr.shape[0] != n:
                raise EwaldmdError(
                    f"property {name!r} has leading dimension {arr.shape[0]}, "
                    f"expected {n}"
                )
            if arr.ndim == 2 and arr.shape[1] != 3:
                raise EwaldmdError(f"property {name!r} must be (N, 3)")

    def wrap(self):
        """Wrap all positions into [0, L) in place."""
        self.position[:] = wrap_position(self.position, self.box)

    def require_neutral(self):
        q_total = total_charge(self)
        if abs(q_total) > NEUTRALITY_TOL:
            raise NeutralityError(
                f"system carries net charge {q_total:.3e}; "
                f"periodic Coulomb energy requires neutrality"
            )


def create_particle_set(n, box):
    """Allocate a zero-initialised ParticleSet of n particles.

    Raises ValueError for n <= 0.
    """
    return ParticleSet(n, box)


def wrap_position(r, box):
    """Map positions onto [0, L) per component, preserving the residue mod L."""
    L = box.edge_length
    out = np.asarray(r, dtype=float) - L * np.floor(np.asarray(r, dtype=float) / L)
    # floor(r/L) can round such that r - L*floor(r/L) == L for tiny negative r
    return np.where(out >= L, out - L, out)


def minimum_image(dr, box):
    """Map displacements onto [-L/2, L/2) per component (nearest image)."""
    L = box.edge_length
    dr = np.asarray(dr, dtype=float)
    return dr - L * np.floor(dr / L + 0.5)


def total_charge(ps):
    """Sum of all particle charges."""
    return float(np.sum(ps.charge))


class GlobalAccumulator:
    """Fixed-length real vector reduced across workers by the loop engine.

    Complex quantities are stored as separate real/imaginary planes inside
    one real vector, so a reciprocal density over N_k modes occupies
    2 * N_k slots.
    """

    __slots__ = ("values",)

    def __init__(self, size):
        size = int(size)
        if size < 1:
            raise ValueError(f"accumulator size must be >= 1, got {size}")
        self.values = np.zeros(size)

    def __len__(self):
        return self.values.shape[0]

    def zero(self):
        self.values[:] = 0.0

    @property
    def scalar(self):
        """The single value of a length-1 accumulator."""
        if self.values.shape[0] != 1:
            raise ValueError("accumulator is not scalar")
        return float(self.values[0])
