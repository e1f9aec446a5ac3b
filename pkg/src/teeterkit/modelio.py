"""JSON serialization of quantum models and detector stations.

Complex scalars are encoded as two-element ``[re, im]`` lists; matrices and
vectors are flat row-major lists of such pairs.  Python's ``json`` module
emits shortest round-trip float literals, so write -> read is bit-faithful
for finite doubles.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import StructureError
from .qmodel import (
    DensityOperator,
    ProjectiveResolution,
    SpecificQuantumModel,
    UnitaryEvolution,
)

FORMAT_VERSION = 1


def encode_complex_array(a: np.ndarray) -> list:
    """Flat row-major [re, im] pairs."""
    flat = np.asarray(a, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def decode_complex_matrix(pairs, dim: int, what: str) -> np.ndarray:
    if len(pairs) != dim * dim:
        raise StructureError(f"{what}: expected {dim * dim} complex entries, got {len(pairs)}")
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(dim, dim)


def decode_complex_vector(pairs, dim: int, what: str) -> np.ndarray:
    if len(pairs) != dim:
        raise StructureError(f"{what}: expected {dim} complex entries, got {len(pairs)}")
    return np.array([complex(re, im) for re, im in pairs])


def model_to_dict(model: SpecificQuantumModel) -> dict:
    return {
        "format": FORMAT_VERSION,
        "dim": model.dim,
        "knobsA": [
            {"label": a, "rho": encode_complex_array(rho.matrix)}
            for a, rho in model.states.items()
        ],
        "knobsB": [
            {
                "label": b,
                "outcomes": [
                    {"label": o, "projection": encode_complex_array(p)}
                    for o, p in zip(res.outcomes, res.projections)
                ],
            }
            for b, res in model.measurements.items()
        ],
        "hamiltonian": encode_complex_array(model.evolution.generator),
    }


def model_from_dict(doc: dict) -> SpecificQuantumModel:
    dim = int(doc["dim"])
    states = {
        entry["label"]: DensityOperator(decode_complex_matrix(entry["rho"], dim, "rho"))
        for entry in doc["knobsA"]
    }
    measurements = {}
    for entry in doc["knobsB"]:
        outcomes = [o["label"] for o in entry["outcomes"]]
        projections = [
            decode_complex_matrix(o["projection"], dim, f"projection {o['label']!r}")
            for o in entry["outcomes"]
        ]
        measurements[entry["label"]] = ProjectiveResolution(tuple(outcomes), tuple(projections))
    evolution = UnitaryEvolution(decode_complex_matrix(doc["hamiltonian"], dim, "hamiltonian"))
    return SpecificQuantumModel(states, measurements, evolution)


def write_model(model: SpecificQuantumModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def read_model(path) -> SpecificQuantumModel:
    return model_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Detector stations (signal x probe factor structure)
# ---------------------------------------------------------------------------

def station_to_dict(station, family: dict | None = None) -> dict:
    """Station JSON: the model format's complex encoding plus factor metadata."""
    doc = {
        "format": FORMAT_VERSION,
        "factors": [station.signal_dim, station.probe_dim],
        "measuredFactor": 1,
        "unitary": encode_complex_array(station.interaction),
        "measurement": {
            "outcomes": [
                {"label": o, "projection": encode_complex_array(p)}
                for o, p in zip(station.measurement.outcomes, station.measurement.projections)
            ]
        },
    }
    if family is not None:
        doc["family"] = [
            {"label": q, "vector": encode_complex_array(np.asarray(v).reshape(-1))}
            for q, v in family.items()
        ]
    return doc


def station_from_dict(doc: dict):
    from .symmetry import DetectorStation  # local import to avoid a cycle

    ds, dp = (int(d) for d in doc["factors"])
    if int(doc.get("measuredFactor", 1)) != 1:
        raise StructureError("stations measure factor index 1 (the probe)")
    unitary = decode_complex_matrix(doc["unitary"], ds * dp, "unitary")
    outcomes = [o["label"] for o in doc["measurement"]["outcomes"]]
    projections = [
        decode_complex_matrix(o["projection"], dp, f"projection {o['label']!r}")
        for o in doc["measurement"]["outcomes"]
    ]
    station = DetectorStation(
        signal_dim=ds,
        probe_dim=dp,
        interaction=unitary,
        measurement=ProjectiveResolution(tuple(outcomes), tuple(projections)),
    )
    family = None
    if "family" in doc:
        family = {
            entry["label"]: decode_complex_vector(entry["vector"], dp, "family vector").reshape(-1)
            for entry in doc["family"]
        }
    return station, family


def write_station(station, path, family: dict | None = None) -> None:
    Path(path).write_text(json.dumps(station_to_dict(station, family), indent=1) + "\n")


def read_station(path):
    return station_from_dict(json.loads(Path(path).read_text()))
