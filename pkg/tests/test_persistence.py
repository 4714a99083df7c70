import json

import numpy as np
import pytest

from conceptorclf.classifier import classify
from conceptorclf.exceptions import ModelChecksumError, ModelCorruptError, ModelVersionError
from conceptorclf.persistence import dumps_model, load_model, loads_model, read_provenance, save_model


def test_round_trip_bit_identical(tmp_path, small_model, two_class_data):
    path = tmp_path / "m.json"
    save_model(small_model, path)
    back = load_model(path)
    assert back.labels == small_model.labels and back.config == small_model.config
    for x, y in [(back.reservoir.W, small_model.reservoir.W), (back.preprocessing.std, small_model.preprocessing.std)]:
        assert np.array_equal(x, y)
    for s in two_class_data.samples[:10]:
        la, ea = classify(small_model, s)
        lb, eb = classify(back, s)
        assert la == lb and np.array_equal(ea.values, eb.values)


def test_serialization_is_deterministic(small_model):
    text = dumps_model(small_model, {"seed": 5})
    assert text == dumps_model(loads_model(text), {"seed": 5})


def test_provenance(tmp_path, small_model):
    save_model(small_model, tmp_path / "m.json", provenance={"cmd": "train"})
    assert read_provenance(tmp_path / "m.json") == {"cmd": "train"}


def test_records_conventions(small_model):
    doc = json.loads(dumps_model(small_model))
    assert doc["conventions"]["correlation_normalization"] == "pooled_state_vectors"
    assert doc["conventions"]["evidence_aggregation"] == "time_mean"


def test_future_version(small_model):
    doc = json.loads(dumps_model(small_model))
    doc["format_version"] += 1
    with pytest.raises(ModelVersionError, match="format_version"):
        loads_model(json.dumps(doc))


def test_truncated(tmp_path, small_model):
    text = dumps_model(small_model)
    path = tmp_path / "m.json"
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelCorruptError):
        load_model(path)


def test_tampered(small_model):
    doc = json.loads(dumps_model(small_model))
    doc["config"]["aperture"] = 11.0
    with pytest.raises(ModelChecksumError):
        loads_model(json.dumps(doc))


def test_missing_section_with_valid_checksum(small_model):
    from conceptorclf.persistence import _digest

    doc = json.loads(dumps_model(small_model))
    del doc["checksum"], doc["preprocessing"]
    doc["checksum"] = _digest(doc)
    with pytest.raises(ModelCorruptError, match="incomplete"):
        loads_model(json.dumps(doc))


def test_not_a_model():
    with pytest.raises(ModelCorruptError):
        loads_model('{"hello": 1}')


def test_binary_garbage(tmp_path):
    path = tmp_path / "m.json"
    path.write_bytes(b"\xff\xfe\x00")
    with pytest.raises(ModelCorruptError):
        load_model(path)
