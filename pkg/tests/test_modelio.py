import json

import numpy as np
import pytest

from teeterkit.errors import StructureError
from teeterkit.modelio import (
    decode_complex_matrix,
    encode_complex_array,
    model_from_dict,
    model_to_dict,
    read_model,
    read_station,
    write_model,
    write_station,
)
from teeterkit.qmodel import random_model
from teeterkit.symmetry import outcome_probabilities, random_symmetric_station, family_states
from teeterkit.verification import probability_table_deviation


def test_complex_encoding_is_flat_row_major():
    m = np.array([[1 + 2j, 3.5], [0, -1j]])
    pairs = encode_complex_array(m)
    assert pairs == [[1.0, 2.0], [3.5, 0.0], [0.0, 0.0], [0.0, -1.0]]
    back = decode_complex_matrix(pairs, 2, "test")
    assert np.array_equal(back, m)


def test_decode_rejects_wrong_length():
    with pytest.raises(StructureError):
        decode_complex_matrix([[1.0, 0.0]], 2, "test")


def test_model_round_trip_is_bit_faithful(tmp_path):
    model = random_model(3, np.random.default_rng(5), n_a=2, n_b=2)
    path = tmp_path / "model.json"
    write_model(model, path)
    loaded = read_model(path)

    for a in model.knobs_a:
        assert np.array_equal(model.states[a].matrix, loaded.states[a].matrix)
    for b in model.knobs_b:
        got = loaded.measurements[b]
        want = model.measurements[b]
        assert got.outcomes == want.outcomes
        for p, q in zip(got.projections, want.projections):
            assert np.array_equal(p, q)
    assert np.array_equal(model.evolution.generator, loaded.evolution.generator)
    assert probability_table_deviation(model, loaded) == 0.0

    rewritten = tmp_path / "model2.json"
    write_model(loaded, rewritten)
    assert path.read_bytes() == rewritten.read_bytes()


def test_model_document_schema_fields():
    model = random_model(2, np.random.default_rng(0))
    doc = model_to_dict(model)
    assert set(doc) == {"format", "dim", "knobsA", "knobsB", "hamiltonian"}
    assert doc["dim"] == 2
    assert {e["label"] for e in doc["knobsA"]} == set(model.knobs_a)
    assert len(doc["knobsA"][0]["rho"]) == 4  # dim^2 [re, im] pairs
    outcome = doc["knobsB"][0]["outcomes"][0]
    assert set(outcome) == {"label", "projection"}
    # the document survives JSON text round-trip with identical floats
    again = model_from_dict(json.loads(json.dumps(doc)))
    assert probability_table_deviation(model, again) == 0.0


def test_station_round_trip(tmp_path):
    station, family = random_symmetric_station(3, np.random.default_rng(9))
    path = tmp_path / "station.json"
    write_station(station, path, family)
    loaded, loaded_family = read_station(path)

    assert np.array_equal(station.interaction, loaded.interaction)
    assert loaded.signal_dim == 3 and loaded.probe_dim == 3
    assert all(np.array_equal(family[q], loaded_family[q]) for q in family)
    (s, p), *_ = family_states(family)
    assert outcome_probabilities(loaded, s, p) == outcome_probabilities(station, s, p)


def test_station_document_carries_factor_metadata(tmp_path):
    station, family = random_symmetric_station(2, np.random.default_rng(4))
    path = tmp_path / "station.json"
    write_station(station, path, family)
    doc = json.loads(path.read_text())
    assert doc["factors"] == [2, 2]
    assert doc["measuredFactor"] == 1
    assert {e["label"] for e in doc["family"]} == {"q0", "q1", "q2"}
