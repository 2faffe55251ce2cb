"""End-to-end validation checks behind the ``verify`` CLI subcommand.

Each check compares the production pipeline against an independent
reference (direct lattice sum, tight-truncation reference, finite
differences, symmetry identities) on a small deterministic system derived
from the config.  A fault-injection hook flips the self-energy sign so the
oracle check demonstrably fails.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import NeutralityError, SimulationBox, create_particle_set
from .driver import init_rocksalt, rocksalt_cells_for
from .ewald import EwaldParams, EwaldSolver, choose_parameters, self_energy
from .oracle import (
    direct_ewald_reference,
    direct_lattice_sum,
    finite_difference_forces,
)

FAULT_SELF_ENERGY_SIGN = "self-energy-sign"
KNOWN_FAULTS = (FAULT_SELF_ENERGY_SIGN,)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    limit: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.measured:.3e} "
                f"(limit {self.limit:.1e}) {self.detail}".rstrip())

    def record(self):
        return {
            "check": self.name,
            "passed": bool(self.passed),
            "measured": float(self.measured),
            "limit": float(self.limit),
            "detail": self.detail,
        }


def _energy_fn(box, params, workers=None):
    """Reusable total-energy evaluator (one solver, forces zeroed per call)."""
    solver = EwaldSolver(box, params, workers=workers)

    def evaluate(ps):
        ps.force[:] = 0.0
        return solver.evaluate(ps).total

    return evaluate


def _verify_system(config):
    """Deterministic jittered rock-salt system from the config seed."""
    cells = rocksalt_cells_for(config.n_particles)
    spacing = config.box_edge / (2 * cells)
    ps = init_rocksalt(cells, spacing)
    rng = np.random.default_rng(config.seed)
    ps.position += 0.1 * spacing * rng.standard_normal(ps.position.shape)
    ps.wrap()
    return ps


def run_checks(config, fault=None):
    """Execute the verification suite; returns a list of CheckResult."""
    if fault is not None and fault not in KNOWN_FAULTS:
        raise ValueError(f"unknown fault {fault!r}; known: {KNOWN_FAULTS}")
    results = []
    workers = config.threads

    # oracle equivalence at small crystal scale
    cell8 = init_rocksalt(1, 2.82)
    params8 = choose_parameters(cell8.count, cell8.box, 1e-6)
    u_ewald = _energy_fn(cell8.box, params8, workers)(cell8)
    if fault == FAULT_SELF_ENERGY_SIGN:
        u_ewald -= 2.0 * self_energy(cell8, params8)
    u_direct = direct_lattice_sum(cell8, cell8.box, 10)
    rel = abs(u_ewald - u_direct) / abs(u_direct)
    results.append(CheckResult(
        "oracle-equivalence", rel <= 1e-5, rel, 1e-5,
        f"ewald {u_ewald:.8f} vs direct {u_direct:.8f}",
    ))

    ps = _verify_system(config)
    params = choose_parameters(ps.count, ps.box, config.tolerance)
    energy = _energy_fn(ps.box, params, workers)
    u0 = energy(ps)
    forces = ps.force.copy()

    # force-gradient consistency against central differences
    fd = finite_difference_forces(energy, ps, 1e-4)
    scale = np.abs(fd) + 1e-8
    err = float(np.max(np.abs(forces - fd) / scale))
    results.append(CheckResult("finite-difference", err <= 1e-4, err, 1e-4))

    # alpha invariance: doubled via pipeline, halved via image-shell path
    s = math.sqrt(-math.log(config.tolerance))
    worst = 0.0
    for factor in (0.5, 2.0):
        a = params.alpha * factor
        alt = EwaldParams(alpha=a, r_cutoff=s / math.sqrt(a),
                          k_cutoff=2.0 * s * math.sqrt(a),
                          tolerance=config.tolerance)
        u_alt = _energy_fn(ps.box, alt, workers)(ps)
        worst = max(worst, abs(u_alt - u0) / abs(u0))
    results.append(CheckResult("alpha-invariance", worst <= 5e-6, worst, 5e-6))

    # independent tight-truncation reference
    u_ref, f_ref = direct_ewald_reference(ps, ps.box, params.alpha,
                                          config.tolerance)
    rel = abs(u0 - u_ref) / abs(u_ref)
    results.append(CheckResult("reference-energy", rel <= 1e-5, rel, 1e-5))

    # translation invariance
    shifted = create_particle_set(ps.count, ps.box)
    shifted.charge[:] = ps.charge
    shifted.position[:] = ps.position + np.array([1.234, -0.567, 8.9])
    shifted.wrap()
    u_shift = energy(shifted)
    rel = abs(u_shift - u0) / abs(u0)
    results.append(CheckResult("translation-invariance", rel <= 1e-10,
                               rel, 1e-10))

    # momentum conservation
    fmax = float(np.abs(forces).max())
    residual = float(np.linalg.norm(forces.sum(axis=0)))
    limit = 1e-8 * fmax * ps.count
    results.append(CheckResult(
        "momentum-conservation", residual <= limit, residual, limit))

    # neutrality enforcement
    charged = create_particle_set(2, SimulationBox(10.0))
    charged.charge[:] = 1.0
    charged.position[1, 0] = 2.5
    try:
        _energy_fn(charged.box, choose_parameters(2, charged.box, 1e-3),
                   workers)(charged)
    except NeutralityError:
        results.append(CheckResult("neutrality-rejection", True, 1.0, 1.0,
                                   "net charge rejected"))
    else:
        results.append(CheckResult("neutrality-rejection", False, 0.0, 1.0,
                                   "net charge was not rejected"))
    return results


def report(results, stream, json_path=None):
    """Human-readable lines plus optional JSON-lines; returns overall pass."""
    all_passed = True
    records = []
    for res in results:
        stream.write(res.line() + "\n")
        records.append(res.record())
        all_passed &= res.passed
    stream.write(f"{'OK' if all_passed else 'FAILED'}: "
                 f"{sum(r.passed for r in results)}/{len(results)} checks\n")
    if json_path:
        with open(json_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    return all_passed
