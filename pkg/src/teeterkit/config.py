"""Run configuration: one JSON document shared by every subcommand.

Sections are validated strictly: an unknown key anywhere is an error, not a
warning, and messages carry the offending section and key.  The model section
is in physical units; everything downstream converts through the natural
scales exactly once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .discrimination import SourceModel
from .errors import ConfigError
from .flipflop import DimensionlessParams, FlipFlopParams, to_dimensionless
from .pde import GridSpec

DEFAULT_CONFIG = {
    "model": {"omega": 1.0, "m": 1.0, "hbar": 1.0, "b": 0.556, "c": 0.0, "lambda": 1.81},
    "curve": {"t_min": 0.0, "t_max": 3.0, "t_step": 0.05},
    "pde": {"extent": 32.0, "points": 1024, "dt": 5e-4, "snapshot_every": 0},
    "discrimination": {
        "sources": [
            {"label": "A", "c0": 0.0, "sigma_c": 0.0},
            {"label": "B", "c0": 0.0, "sigma_c": 0.5},
        ],
        "waiting_times": [0.5, 1.0, 1.5],
        "trials_per_run": 100000,
        "seed": 1,
    },
    "seed": 1,
}


@dataclass(frozen=True)
class CurveConfig:
    t_min: float
    t_max: float
    t_step: float

    def __post_init__(self):
        if self.t_step <= 0:
            raise ConfigError("curve.t_step must be positive")
        if self.t_max < self.t_min:
            raise ConfigError("curve.t_max must be >= curve.t_min")


@dataclass(frozen=True)
class PdeConfig:
    grid: GridSpec
    snapshot_every: int


@dataclass(frozen=True)
class DiscriminationConfig:
    sources: tuple
    waiting_times: tuple
    trials_per_run: int
    seed: int


@dataclass(frozen=True)
class AppConfig:
    model: FlipFlopParams
    curve: CurveConfig
    pde: PdeConfig
    discrimination: DiscriminationConfig
    seed: int
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def dimensionless(self) -> DimensionlessParams:
        return to_dimensionless(self.model)


def _require_keys(section: dict, allowed: dict, where: str) -> dict:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    out = {}
    for key, (typ, default) in allowed.items():
        if key in section:
            value = section[key]
            if typ is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if not isinstance(value, typ) or isinstance(value, bool):
                raise ConfigError(f"{where}.{key} must be of type {typ.__name__}")
            out[key] = value
        elif default is not None:
            out[key] = default
        else:
            raise ConfigError(f"missing required key {where}.{key}")
    return out


def _parse_source(entry: dict, index: int, model: FlipFlopParams) -> SourceModel:
    where = f"discrimination.sources[{index}]"
    vals = _require_keys(entry, {
        "label": (str, None),
        "c0": (float, 0.0),
        "sigma_c": (float, 0.0),
    }, where)
    dimless = to_dimensionless(model)
    # Source offsets are given in the model's natural length unit already.
    return SourceModel(label=vals["label"], b=dimless.b, lam=dimless.lam,
                       c0=vals["c0"], sigma_c=vals["sigma_c"])


def parse_config(doc: dict) -> AppConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be a JSON object")
    unknown = sorted(set(doc) - {"model", "curve", "pde", "discrimination", "seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")

    model_vals = _require_keys(doc.get("model", {}), {
        "omega": (float, 1.0),
        "m": (float, 1.0),
        "hbar": (float, 1.0),
        "b": (float, 0.556),
        "c": (float, 0.0),
        "lambda": (float, 1.81),
    }, "model")
    model = FlipFlopParams(omega=model_vals["omega"], m=model_vals["m"],
                           hbar=model_vals["hbar"], b=model_vals["b"],
                           c=model_vals["c"], lam=model_vals["lambda"])

    curve_vals = _require_keys(doc.get("curve", {}), {
        "t_min": (float, 0.0),
        "t_max": (float, 3.0),
        "t_step": (float, 0.05),
    }, "curve")
    curve = CurveConfig(**curve_vals)

    pde_vals = _require_keys(doc.get("pde", {}), {
        "extent": (float, 32.0),
        "points": (int, 1024),
        "dt": (float, 5e-4),
        "snapshot_every": (int, 0),
    }, "pde")
    try:
        grid = GridSpec(extent=pde_vals["extent"], points=pde_vals["points"],
                        dt=pde_vals["dt"])
    except Exception as exc:
        raise ConfigError(f"pde section invalid: {exc}") from exc
    pde = PdeConfig(grid=grid, snapshot_every=pde_vals["snapshot_every"])

    disc_doc = doc.get("discrimination", DEFAULT_CONFIG["discrimination"])
    disc_vals = _require_keys(disc_doc, {
        "sources": (list, DEFAULT_CONFIG["discrimination"]["sources"]),
        "waiting_times": (list, [0.5, 1.0, 1.5]),
        "trials_per_run": (int, 100000),
        "seed": (int, 1),
    }, "discrimination")
    sources = tuple(_parse_source(e, i, model) for i, e in enumerate(disc_vals["sources"]))
    if len(sources) != 2:
        raise ConfigError("discrimination.sources must list exactly two sources")
    if disc_vals["trials_per_run"] < 1:
        raise ConfigError("discrimination.trials_per_run must be >= 1")
    times = tuple(float(t) for t in disc_vals["waiting_times"])
    if not times:
        raise ConfigError("discrimination.waiting_times must be nonempty")
    disc = DiscriminationConfig(sources=sources, waiting_times=times,
                                trials_per_run=disc_vals["trials_per_run"],
                                seed=disc_vals["seed"])

    seed = doc.get("seed", 1)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    return AppConfig(model=model, curve=curve, pde=pde, discrimination=disc,
                     seed=seed, raw=doc)


def load_config(path=None) -> AppConfig:
    """Load and validate a config file; None loads the built-in defaults."""
    if path is None:
        return parse_config(json.loads(json.dumps(DEFAULT_CONFIG)))
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(doc)
