"""Experiment configuration: JSON schema, validation, canonical hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import InvalidParameter
from .potentials import Potential, make_bump, make_square_well

SCHEMA_VERSION = 1

__all__ = ["ExperimentConfig", "load_config", "make_potential", "config_hash"]


@dataclass
class ExperimentConfig:
    """Validated experiment description (see docs/config.md for the schema)."""

    dim: int
    potential: dict
    source_y: list
    seed: int = 12345
    epsilon0: float = 0.05
    spectral: dict = field(default_factory=dict)
    evolve: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)
    bump_check: dict = field(default_factory=dict)
    sweeps: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    probes: list = field(default_factory=list)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise InvalidParameter("config must be a JSON object")
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise InvalidParameter(
                f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        pot = d.get("potential")
        if not isinstance(pot, dict) or "kind" not in pot:
            raise InvalidParameter("config requires potential.kind")
        if pot["kind"] not in ("square_well", "bump", "zero"):
            raise InvalidParameter(f"unknown potential.kind {pot['kind']!r}")
        if pot["kind"] != "zero":
            for key in ("v0", "r"):
                if key not in pot:
                    raise InvalidParameter(f"potential.{key} is required")
        dim = int(d.get("dim", 1))
        if dim < 1:
            raise InvalidParameter("dim must be >= 1")
        source_y = d.get("source_y", [0.0] * dim)
        if len(source_y) != dim:
            raise InvalidParameter("source_y must have `dim` components")
        return cls(
            dim=dim,
            potential=dict(pot),
            source_y=[float(v) for v in source_y],
            seed=int(d.get("seed", 12345)),
            epsilon0=float(d.get("epsilon0", 0.05)),
            spectral=dict(d.get("spectral", {})),
            evolve=dict(d.get("evolve", {})),
            mc=dict(d.get("mc", {})),
            bump_check=dict(d.get("bump_check", {})),
            sweeps=dict(d.get("sweeps", {})),
            tolerances=dict(d.get("tolerances", {})),
            probes=[list(map(float, p)) for p in d.get("probes", [])],
            raw=d,
        )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def make_potential(cfg: ExperimentConfig) -> Potential:
    kind = cfg.potential["kind"]
    if kind == "square_well":
        return make_square_well(cfg.dim, float(cfg.potential["v0"]),
                                float(cfg.potential["r"]))
    if kind == "bump":
        return make_bump(cfg.dim, float(cfg.potential["v0"]),
                         float(cfg.potential["r"]))
    # v == 0 sentinel: zero field with a nominal support marker
    import numpy as np

    return Potential(dim=cfg.dim,
                     evaluate=lambda x: np.zeros(np.shape(x)[:-1] if cfg.dim > 1
                                                 else np.shape(x)),
                     support_radius=float(cfg.potential.get("r", 1.0)),
                     smoothness="Cinf", max_value=0.0, min_value=0.0)


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
