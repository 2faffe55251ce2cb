"""Strict key = value configuration files for the CLI.

Four sections are recognised; unknown sections, unknown keys, repeated keys
and type mismatches are errors carrying the offending line number.

    [system]  n, box, density, coulomb
    [ewald]   tolerance, alpha, r_cutoff
    [lj]      sigma, epsilon, cutoff, enabled
    [run]     dt, steps, threads, seed, velocity_scale
"""

import os

from .core import ConfigError
from .driver import SimConfig
from .potentials import LJParams


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SCHEMA = {
    "system": {"n": int, "box": float, "density": float, "coulomb": _parse_bool},
    "ewald": {"tolerance": float, "alpha": float, "r_cutoff": float},
    "lj": {"sigma": float, "epsilon": float, "cutoff": float,
           "enabled": _parse_bool},
    "run": {"dt": float, "steps": int, "threads": int, "seed": int,
            "velocity_scale": float},
}


def _parse_sections(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    values = {}
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip().lower()
                if section not in _SCHEMA:
                    raise ConfigError(
                        f"{path}:{lineno}: unknown section [{section}]"
                    )
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path}:{lineno}: expected key = value, got {line!r}"
                )
            if section is None:
                raise ConfigError(
                    f"{path}:{lineno}: key outside any [section]"
                )
            key, _, text = line.partition("=")
            key = key.strip().lower()
            schema = _SCHEMA[section]
            if key not in schema:
                raise ConfigError(
                    f"{path}:{lineno}: unknown key {key!r} in [{section}]"
                )
            if (section, key) in values:
                raise ConfigError(
                    f"{path}:{lineno}: duplicate key {key!r} in [{section}]"
                )
            try:
                values[(section, key)] = schema[key](text.strip())
            except ValueError as err:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key!r}: {err}"
                ) from err
    return values


def parse_config(path):
    """Read a config file into a SimConfig, filling defaults."""
    values = _parse_sections(path)

    def get(section, key, default=None):
        return values.get((section, key), default)

    n = get("system", "n")
    if n is None:
        raise ConfigError(f"{path}: [system] n is required")
    box = get("system", "box")
    density = get("system", "density")
    if box is not None and density is not None:
        raise ConfigError(
            f"{path}: give [system] box or density, not both"
        )
    if box is None:
        if density is None:
            raise ConfigError(f"{path}: [system] needs box or density")
        box = (n / density) ** (1.0 / 3.0)

    sigma = get("lj", "sigma", 2.5)
    lj = LJParams(
        epsilon_lj=get("lj", "epsilon", 1.0),
        sigma=sigma,
        r_cutoff_lj=get("lj", "cutoff", 2.5 * sigma),
    )
    return SimConfig(
        n_particles=n,
        box_edge=box,
        tolerance=get("ewald", "tolerance", 1e-6),
        alpha=get("ewald", "alpha"),
        r_cutoff=get("ewald", "r_cutoff"),
        dt=get("run", "dt", 0.005),
        n_steps=get("run", "steps", 10),
        velocity_scale=get("run", "velocity_scale", 0.0),
        threads=get("run", "threads", 1),
        seed=get("run", "seed", 0),
        coulomb_on=get("system", "coulomb", True),
        lj_on=get("lj", "enabled", True),
        lj=lj,
    )
