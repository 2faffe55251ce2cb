"""Shared-memory MD micro-framework with Particle-Ewald electrostatics.

Kernels are written once against the loop-engine contract (access
descriptors, ordered pairs, per-worker reductions) and run either as numba
nogil machine code or through a vectorised numpy fallback, selected by the
EWALDMD_BACKEND environment variable.
"""

from .backend import get_backend, resolve_workers, set_backend
from .celllist import CellList, build_cell_list
from .core import (
    INC,
    INC_ZERO,
    READ,
    Access,
    BoxTooSmallError,
    CoincidentParticlesError,
    ConfigError,
    ContractViolationError,
    CutoffTooLargeError,
    EwaldmdError,
    GlobalAccumulator,
    KSpaceEmptyError,
    LatticeError,
    NeutralityError,
    OracleSizeError,
    ParticleSet,
    SimulationBox,
    XYZFormatError,
    create_particle_set,
    minimum_image,
    total_charge,
    wrap_position,
)
from .driver import (
    ForceAssembler,
    RunMetrics,
    SimConfig,
    init_rocksalt,
    run,
    velocity_verlet_step,
)
from .engine import (
    Kernel,
    PairLoop,
    ParticleLoop,
    execute_pair_loop,
    execute_particle_loop,
    reduce_global,
)
from .ewald import (
    EwaldParams,
    EwaldSolver,
    ReciprocalSpace,
    choose_parameters,
    compute_rho_hat,
    enumerate_kvectors,
    long_range_energy_forces,
    self_energy,
    total_coulomb,
)
from .oracle import (
    direct_ewald_reference,
    direct_lattice_sum,
    finite_difference_forces,
)
from .potentials import LJParams, lj_kernel

__version__ = "0.1.0"
