"""Extended-XYZ particle file IO.

Line 1 holds the particle count, line 2 a cubic lattice record
``Lattice="L 0 0 0 L 0 0 0 L"``, then one ``symbol x y z q`` record per
particle.  Values are printed with 17 significant digits so a write/read
round trip reproduces positions and charges bitwise.
"""

import re

import numpy as np

from .core import SimulationBox, XYZFormatError, create_particle_set

_LATTICE_RE = re.compile(r'Lattice="([^"]+)"')


def write_xyz(ps, path):
    """Write positions and charges; symbols follow the charge sign."""
    L = ps.box.edge_length
    with open(path, "w") as fh:
        fh.write(f"{ps.count}\n")
        fh.write(f'Lattice="{L:.17g} 0 0 0 {L:.17g} 0 0 0 {L:.17g}"\n')
        for i in range(ps.count):
            q = ps.charge[i]
            sym = "Na" if q > 0 else ("Cl" if q < 0 else "X")
            x, y, z = ps.position[i]
            fh.write(f"{sym} {x:.17g} {y:.17g} {z:.17g} {q:.17g}\n")


def read_xyz(path):
    """Read a particle set written by write_xyz (or compatible)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise XYZFormatError(f"{path}: truncated file")
    try:
        n = int(lines[0].strip())
    except ValueError as err:
        raise XYZFormatError(f"{path}:1: particle count expected") from err

    match = _LATTICE_RE.search(lines[1])
    if not match:
        raise XYZFormatError(f'{path}:2: missing Lattice="..." record')
    try:
        cell = np.array([float(t) for t in match.group(1).split()])
    except ValueError as err:
        raise XYZFormatError(f"{path}:2: non-numeric lattice entry") from err
    if cell.shape[0] != 9:
        raise XYZFormatError(f"{path}:2: lattice needs 9 entries")
    mat = cell.reshape(3, 3)
    diag = np.diag(mat)
    if (mat != np.diag(diag)).any() or diag[0] != diag[1] or diag[1] != diag[2]:
        raise XYZFormatError(f"{path}:2: only cubic boxes are supported")

    records = [ln for ln in lines[2:] if ln.strip()]
    if len(records) != n:
        raise XYZFormatError(
            f"{path}: header says {n} particles, found {len(records)} records"
        )

    ps = create_particle_set(n, SimulationBox(diag[0]))
    for k, line in enumerate(records):
        tokens = line.split()
        if len(tokens) < 5:
            raise XYZFormatError(
                f"{path}:{k + 3}: expected 'symbol x y z q'; the trailing q "
                f"(charge) field is required"
            )
        try:
            vals = [float(t) for t in tokens[1:5]]
        except ValueError as err:
            raise XYZFormatError(
                f"{path}:{k + 3}: non-numeric field in {line!r}"
            ) from err
        ps.position[k] = vals[:3]
        ps.charge[k] = vals[3]
    return ps
