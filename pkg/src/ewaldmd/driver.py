"""Benchmark system construction, force assembly and NVE time stepping."""

import time
from dataclasses import dataclass, field

import numpy as np

from .celllist import build_cell_list
from .core import INC_ZERO, GlobalAccumulator, LatticeError, SimulationBox
from .engine import PairLoop
from .ewald import EwaldSolver, choose_parameters
from .potentials import LJParams, lj_kernel

#: Lattice spacing giving the benchmark density of one atom per (2.5 A)^3.
BENCH_SPACING = 2.5


@dataclass
class SimConfig:
    """Everything a run needs; built by hand or from a config file."""

    n_particles: int = 1728
    box_edge: float = 30.0
    tolerance: float = 1e-6
    alpha: float | None = None
    r_cutoff: float | None = None
    dt: float = 0.005
    n_steps: int = 10
    velocity_scale: float = 0.0
    threads: int = 1
    seed: int = 0
    coulomb_on: bool = True
    lj_on: bool = True
    lj: LJParams = field(default_factory=LJParams)

    def __post_init__(self):
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def rocksalt_cells_for(n):
    """Invert N = (2*c)^3; raises LatticeError when N is not such a cube."""
    c = round((n ** (1.0 / 3.0)) / 2.0)
    if c < 1 or (2 * c) ** 3 != n:
        raise LatticeError(
            f"N = {n} is not (2c)^3 for integer c; no alternating rock-salt "
            f"lattice closes at this count"
        )
    return c


def init_rocksalt(cells_per_dim, spacing):
    """Alternating +-1 charges on a simple cubic lattice.

    2*cells_per_dim sites per dimension at the given spacing, so
    N = (2*cells_per_dim)^3 and L = 2*cells_per_dim*spacing; the even site
    count per dimension closes the +-1 alternation, making the net charge
    exactly zero.
    """
    cells_per_dim = int(cells_per_dim)
    if cells_per_dim < 1:
        raise LatticeError(
            f"cells_per_dim must be >= 1, got {cells_per_dim}"
        )
    side = 2 * cells_per_dim
    box = SimulationBox(side * spacing)
    from .core import create_particle_set

    ps = create_particle_set(side**3, box)
    idx = np.arange(side)
    ix, iy, iz = np.meshgrid(idx, idx, idx, indexing="ij")
    ps.position[:, 0] = (ix.ravel()) * spacing
    ps.position[:, 1] = (iy.ravel()) * spacing
    ps.position[:, 2] = (iz.ravel()) * spacing
    ps.charge[:] = np.where((ix + iy + iz).ravel() % 2 == 0, 1.0, -1.0)
    return ps


class ForceAssembler:
    """Zeroes forces, then runs the enabled kernels (Coulomb, then LJ).

    Owns the Ewald solver and LJ loop for one configuration so per-step
    calls only rebuild cell lists.  ``last`` keeps the energy breakdown and
    component timings of the most recent assembly.
    """

    def __init__(self, ps, config):
        self.config = config
        self.box = ps.box
        self.solver = None
        self.params = None
        if config.coulomb_on:
            self.params = choose_parameters(
                ps.count, ps.box, config.tolerance,
                alpha=config.alpha, r_cutoff=config.r_cutoff,
            )
            self.solver = EwaldSolver(ps.box, self.params,
                                      workers=config.threads)
        self._lj_loop = None
        if config.lj_on:
            kern, consts = lj_kernel(config.lj)
            self._u_lj = GlobalAccumulator(1)
            self._lj_loop = PairLoop(kern, (consts, self._u_lj))
        self.last = None

    def __call__(self, ps):
        ps.force[:] = 0.0
        u_coulomb = 0.0
        u_lj = 0.0
        timings = {"t_sr": 0.0, "t_alg1": 0.0, "t_alg2": 0.0, "t_lj": 0.0}
        if self.solver is not None:
            res = self.solver.evaluate(ps)
            u_coulomb = res.total
            timings["t_sr"] = res.t_sr
            timings["t_alg1"] = res.t_alg1
            timings["t_alg2"] = res.t_alg2
        if self._lj_loop is not None:
            t0 = time.perf_counter()
            cl = build_cell_list(ps, self.box, self.config.lj.r_cutoff_lj)
            self._lj_loop.execute(ps, cl, workers=self.config.threads)
            u_lj = self._u_lj.scalar
            timings["t_lj"] = time.perf_counter() - t0
        self.last = {"u_coulomb": u_coulomb, "u_lj": u_lj, **timings}
        return u_coulomb + u_lj


def kinetic_energy(ps):
    return 0.5 * float(ps.mass @ np.einsum("ij,ij->i", ps.velocity,
                                           ps.velocity))


def velocity_verlet_step(ps, dt, force_assembler, timings=None):
    """One NVE velocity-Verlet update in place.

    Forces must be current for the entering positions; positions are
    wrapped after the drift and forces refreshed through force_assembler.
    When given, ``timings`` receives the wall time of the integrator
    updates under key ``t_integrate``.
    """
    t0 = time.perf_counter()
    inv_m = 1.0 / ps.mass[:, None]
    ps.velocity += 0.5 * dt * ps.force * inv_m
    ps.position += dt * ps.velocity
    ps.wrap()
    t1 = time.perf_counter()
    force_assembler(ps)
    t2 = time.perf_counter()
    ps.velocity += 0.5 * dt * ps.force * inv_m
    t3 = time.perf_counter()
    if timings is not None:
        timings["t_integrate"] = (t1 - t0) + (t3 - t2)


@dataclass
class RunMetrics:
    """Per-step wall times, component timings and the energy trace."""

    n_steps: int
    step_wall: list = field(default_factory=list)
    components: dict = field(default_factory=lambda: {
        "t_sr": [], "t_alg1": [], "t_alg2": [], "t_lj": [], "t_integrate": [],
    })
    energy_trace: list = field(default_factory=list)  # (kinetic, potential)
    max_step_displacement: float = 0.0
    alpha: float = 0.0
    r_cutoff: float = 0.0
    n_k: int = 0

    @property
    def total_energies(self):
        return [ke + pe for ke, pe in self.energy_trace]

    @property
    def drift(self):
        """Max relative total-energy deviation from the initial value."""
        e = self.total_energies
        if len(e) < 2 or e[0] == 0.0:
            return 0.0
        e0 = e[0]
        return max(abs(x - e0) for x in e) / abs(e0)

    def median_step_wall(self, warmup=2):
        timed = self.step_wall[warmup:] or self.step_wall
        return float(np.median(timed)) if timed else 0.0

    def median_component(self, key, warmup=2):
        vals = self.components[key][warmup:] or self.components[key]
        return float(np.median(vals)) if vals else 0.0


def initial_velocities(ps, scale, seed):
    """Seeded Gaussian draw of width scale with the centre-of-mass motion
    removed; scale 0 leaves velocities zero (deterministic benchmarks)."""
    if scale <= 0.0:
        ps.velocity[:] = 0.0
        return
    rng = np.random.default_rng(seed)
    ps.velocity[:] = scale * rng.standard_normal((ps.count, 3))
    ps.velocity -= (ps.mass @ ps.velocity) / ps.mass.sum()


def run(config, ps=None):
    """Advance n_steps of NVE dynamics, recording timings and energies.

    Builds the rock-salt benchmark system when ps is not supplied.  With
    n_steps = 0 only the initial force assembly runs and the energy is
    recorded once.
    """
    if ps is None:
        cells = rocksalt_cells_for(config.n_particles)
        spacing = config.box_edge / (2 * cells)
        ps = init_rocksalt(cells, spacing)
    initial_velocities(ps, config.velocity_scale, config.seed)

    assembler = ForceAssembler(ps, config)
    metrics = RunMetrics(n_steps=config.n_steps)
    if assembler.params is not None:
        metrics.alpha = assembler.params.alpha
        metrics.r_cutoff = assembler.params.r_cutoff
        metrics.n_k = assembler.solver.recip.count

    pe = assembler(ps)
    metrics.energy_trace.append((kinetic_energy(ps), pe))

    for _ in range(config.n_steps):
        prev = ps.position.copy()
        step_t = {}
        t0 = time.perf_counter()
        velocity_verlet_step(ps, config.dt, assembler, timings=step_t)
        t1 = time.perf_counter()

        metrics.step_wall.append(t1 - t0)
        last = assembler.last
        for key in ("t_sr", "t_alg1", "t_alg2", "t_lj"):
            metrics.components[key].append(last[key])
        metrics.components["t_integrate"].append(step_t["t_integrate"])
        pe = last["u_coulomb"] + last["u_lj"]
        metrics.energy_trace.append((kinetic_energy(ps), pe))

        delta = np.abs(ps.position - prev)
        delta = np.minimum(delta, ps.box.edge_length - delta)  # unwrap jumps
        metrics.max_step_displacement = max(metrics.max_step_displacement,
                                            float(delta.max()))
    return metrics
