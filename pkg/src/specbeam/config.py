"""JSON run configuration: loading, validation and pipeline builders.

The config is a single JSON document with a ``schema_version`` field and
nested sections; its canonical hash goes into every output header so runs
are reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .coefficients import SpatialGrid, build_profiles, preset_samples
from .errors import ConfigError
from .nonlinear_solver import (
    Nonlinearity,
    SolveContext,
    SolverConfig,
    decompose_forcing,
    tanh_nonlinearity,
    zero_nonlinearity,
)
from .spectral_operator import assemble_lattice
from .transforms import FrequencySpec, mode_field, synthesize

SCHEMA_VERSION = 1


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    return cfg


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    section = cfg.get(name)
    if section is None:
        if required:
            raise ConfigError(f"config is missing the {name!r} section")
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    return dict(section)


def make_profile(cfg: dict, strict_override: bool | None = None):
    section = _section(cfg, "coefficients")
    resolution = int(section.get("resolution", 512))
    grid = SpatialGrid.uniform(resolution)
    strict = bool(section.get("strict_a2", False))
    if strict_override is not None:
        strict = strict_override
    calibrate = bool(section.get("calibrate", strict))
    if "preset" in section:
        alpha, beta, rho0 = preset_samples(section["preset"], grid, section.get("params"))
    elif "alpha" in section and "beta" in section:
        alpha = np.asarray(section["alpha"], dtype=float)
        beta = np.asarray(section["beta"], dtype=float)
        rho0 = float(section.get("rho0", 1.0))
        if alpha.shape != grid.nodes.shape or beta.shape != grid.nodes.shape:
            raise ConfigError(
                f"literal alpha/beta need {grid.nodes.size} samples for resolution {resolution}"
            )
    else:
        raise ConfigError("coefficients need either a preset name or literal alpha/beta arrays")
    return build_profiles(alpha, beta, rho0, grid, strict_a2=strict, calibrate=calibrate)


def make_frequency(cfg: dict) -> FrequencySpec:
    section = _section(cfg, "frequency")
    try:
        return FrequencySpec(
            p=int(section.get("p", 1)), q=int(section.get("q", 1)),
            m_max=int(section.get("m_max", 16)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid frequency section: {exc}") from exc


def spectrum_count(cfg: dict) -> int:
    return int(_section(cfg, "spectrum").get("count", 4))


def fit_n_min(cfg: dict) -> int:
    return int(_section(cfg, "spectrum").get("fit_n_min", 5))


def null_tolerance(cfg: dict):
    value = _section(cfg, "lattice", required=False).get("null_tol")
    return None if value is None else float(value)


def make_nonlinearity(cfg: dict) -> Nonlinearity:
    section = _section(cfg, "nonlinearity", required=False)
    kind = section.get("kind", "zero")
    if kind == "zero":
        return zero_nonlinearity()
    if kind == "tanh":
        return tanh_nonlinearity(float(section.get("amplitude", 1.0)))
    raise ConfigError(f"unknown nonlinearity kind {kind!r}; choose 'zero' or 'tanh'")


_CONTEXT_KEYS = ("time_nodes", "oversample")


def make_solver_config(cfg: dict) -> SolverConfig:
    section = _section(cfg, "solver", required=False)
    config = SolverConfig()
    for key, value in section.items():
        if key in _CONTEXT_KEYS:
            continue
        if not hasattr(config, key):
            raise ConfigError(f"unknown solver option {key!r}")
        setattr(config, key, type(getattr(config, key))(value))
    return config


def _modes_from(section_name: str, entries, ctx: SolveContext):
    parsed = []
    for entry in entries:
        try:
            m = int(entry["m"])
            n = int(entry["n"])
            value = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad mode entry in {section_name}: {entry!r}") from exc
        parsed.append((m, n, value))
    if not parsed:
        raise ConfigError(f"{section_name} needs at least one mode entry")
    return mode_field(ctx.freq.m_max, ctx.spectrum.count, parsed, hermitian=True)


def make_forcing(cfg: dict, ctx: SolveContext):
    """Forcing spec from coefficient entries of f_hat listed in the config."""
    section = _section(cfg, "forcing")
    margin = float(section.get("margin", 0.05))
    field = _modes_from("forcing", section.get("modes", []), ctx)
    scale = float(section.get("scale", 1.0))
    coeff = type(field)(scale * field.coeff)
    f_hat = synthesize(coeff, ctx.spectrum, ctx.freq, time_nodes=ctx.time_nodes)
    return decompose_forcing(f_hat, ctx, margin=margin)


def make_manufactured_target(cfg: dict, ctx: SolveContext):
    section = _section(cfg, "manufactured")
    return _modes_from("manufactured", section.get("modes", []), ctx)


def make_context(cfg: dict, profile, spectrum, freq) -> SolveContext:
    lattice = assemble_lattice(spectrum, freq, null_tolerance(cfg))
    solver = _section(cfg, "solver", required=False)
    return SolveContext.build(
        profile, spectrum, freq, lattice=lattice,
        time_nodes=solver.get("time_nodes"),
        oversample=int(solver.get("oversample", 2)),
    )
