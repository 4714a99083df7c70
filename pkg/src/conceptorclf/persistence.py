"""Lossless model files.

A model is stored as one JSON document. Matrices are base64-encoded
little-endian float64 buffers, so every value round-trips bit for bit, and a
SHA-256 digest over the canonical body detects corruption. The document also
carries the training configuration and any caller-supplied provenance.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
from pathlib import Path

import numpy as np

from .classifier import (
    CORRELATION_NORMALIZATION,
    EVIDENCE_AGGREGATION,
    FORMAT_VERSION,
    ClassifierModel,
    TrainingConfig,
)
from .conceptor import Conceptor
from .dataio import NormalizationStats, atomic_write_text
from .exceptions import ModelChecksumError, ModelCorruptError, ModelVersionError, NumericalError
from .reservoir import Reservoir, ReservoirParams

FORMAT_NAME = "conceptorclf-model"


def _encode(arr):
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "dtype": "<f8",
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _decode(obj):
    if obj.get("dtype") != "<f8":
        raise ModelCorruptError(f"unsupported array dtype {obj.get('dtype')!r}")
    shape = tuple(int(v) for v in obj["shape"])
    try:
        raw = base64.b64decode(obj["data"], validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ModelCorruptError(f"array payload is not valid base64: {exc}") from exc
    if len(raw) != 8 * int(np.prod(shape, dtype=np.int64)):
        raise ModelCorruptError(f"array payload has {len(raw)} bytes, shape {shape} needs {8 * int(np.prod(shape))}")
    return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)


def _digest(body):
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return "sha256:" + hashlib.sha256(canonical.encode("ascii")).hexdigest()


def model_to_dict(model: ClassifierModel, provenance=None):
    res = model.reservoir
    body = {
        "format": FORMAT_NAME,
        "format_version": model.format_version,
        "config": model.config.to_dict(),
        "conventions": {
            "correlation_normalization": CORRELATION_NORMALIZATION,
            "evidence_aggregation": EVIDENCE_AGGREGATION,
            "tie_break": "lexicographic",
        },
        "channel_names": list(model.channel_names),
        "reservoir": {
            "params": res.params.to_dict(),
            "W": _encode(res.W),
            "W_in": _encode(res.W_in),
            "b": _encode(res.b),
        },
        "preprocessing": {
            "mean": _encode(model.preprocessing.mean),
            "std": _encode(model.preprocessing.std),
        },
        "conceptors": [
            {"label": c.label, "aperture": c.aperture, "C": _encode(c.C)} for c in model.conceptors
        ],
    }
    if provenance is not None:
        body["provenance"] = provenance
    return dict(body, checksum=_digest(body))


def dumps_model(model: ClassifierModel, provenance=None) -> str:
    return json.dumps(model_to_dict(model, provenance), sort_keys=True, indent=1) + "\n"


def save_model(model: ClassifierModel, destination, provenance=None):
    """Write ``model`` to ``destination`` atomically. ``provenance`` must be JSON-serializable."""
    atomic_write_text(Path(destination), dumps_model(model, provenance))


def model_from_dict(doc) -> ClassifierModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelCorruptError("not a conceptorclf model file")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"model format_version {version!r} is not supported (expected {FORMAT_VERSION})")
    body = {k: v for k, v in doc.items() if k != "checksum"}
    if doc.get("checksum") != _digest(body):
        raise ModelChecksumError("model checksum does not match its contents")
    try:
        params = ReservoirParams(**doc["reservoir"]["params"])
        reservoir = Reservoir(
            W=_decode(doc["reservoir"]["W"]),
            W_in=_decode(doc["reservoir"]["W_in"]),
            b=_decode(doc["reservoir"]["b"]),
            params=params,
        )
        stats = NormalizationStats(
            mean=_decode(doc["preprocessing"]["mean"]),
            std=_decode(doc["preprocessing"]["std"]),
        )
        conceptors = tuple(
            Conceptor(C=_decode(c["C"]), aperture=float(c["aperture"]), label=str(c["label"]))
            for c in doc["conceptors"]
        )
        return ClassifierModel(
            reservoir=reservoir,
            conceptors=conceptors,
            preprocessing=stats,
            config=TrainingConfig(**doc["config"]),
            channel_names=tuple(doc.get("channel_names", ())),
            format_version=version,
        )
    except (KeyError, TypeError, ValueError, NumericalError) as exc:
        raise ModelCorruptError(f"model file is incomplete or inconsistent: {exc}") from exc


def loads_model(text) -> ClassifierModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelCorruptError(f"model file is truncated or not valid JSON: {exc}") from exc
    return model_from_dict(doc)


def load_model(source) -> ClassifierModel:
    try:
        text = Path(source).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelCorruptError(f"{source}: not UTF-8 text") from exc
    return loads_model(text)


def read_provenance(source):
    """Return the provenance block of a model file, or ``None``."""
    return json.loads(Path(source).read_text(encoding="utf-8")).get("provenance")
