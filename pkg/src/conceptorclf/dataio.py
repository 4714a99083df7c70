"""Pose-sequence datasets: CSV/manifest I/O, channel normalization and splitting.

On disk a dataset is a directory of pose CSVs (one clip per file, header
``frame,<channel...>``) plus a manifest whose lines read
``clip_id,label,path``. Paths in a manifest are relative to the manifest.
"""

from __future__ import annotations

import csv
import io
import os
import re
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError, DimensionError, PoseFormatError

CONSTANT_STD = 1e-12


@dataclass(frozen=True, eq=False)
class Sample:
    frames: np.ndarray
    clip_id: str
    label: Optional[str] = None
    frame_rate: Optional[float] = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise DataError(f"clip {self.clip_id!r}: frames must be a nonempty T x K matrix, got {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise DataError(f"clip {self.clip_id!r}: frames contain NaN or infinite values")
        if self.frame_rate is not None and not self.frame_rate > 0:
            raise DataError(f"clip {self.clip_id!r}: frame_rate must be positive")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self):
        return self.frames.shape[0]

    @property
    def n_channels(self):
        return self.frames.shape[1]


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple
    channel_names: tuple

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "channel_names", tuple(str(c) for c in self.channel_names))
        k = len(self.channel_names)
        seen = set()
        for s in self.samples:
            if s.n_channels != k:
                raise DimensionError(f"clip {s.clip_id!r} has {s.n_channels} channels, dataset declares {k}")
            if s.clip_id in seen:
                raise DataError(f"duplicate clip_id {s.clip_id!r}")
            seen.add(s.clip_id)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def n_channels(self):
        return len(self.channel_names)

    @property
    def labels(self):
        return [s.label for s in self.samples]

    @property
    def clip_ids(self):
        return [s.clip_id for s in self.samples]

    def label_set(self):
        return sorted({s.label for s in self.samples if s.label is not None})


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray

    @property
    def constant(self):
        """Channels whose training std is below 1e-12; these are centered but not scaled."""
        return self.std < CONSTANT_STD

    @property
    def n_channels(self):
        return self.mean.shape[0]

    def apply(self, frames):
        frames = np.asarray(frames, dtype=np.float64)
        if frames.shape[-1] != self.n_channels:
            raise DimensionError(f"expected {self.n_channels} channels, got {frames.shape[-1]}")
        scale = np.where(self.constant, 1.0, self.std)
        return (frames - self.mean) / scale

    @classmethod
    def fit(cls, sequences):
        stacked = np.concatenate([np.asarray(s, dtype=np.float64) for s in sequences], axis=0)
        return cls(mean=stacked.mean(axis=0), std=stacked.std(axis=0))

    @classmethod
    def identity(cls, n_channels):
        return cls(mean=np.zeros(n_channels), std=np.ones(n_channels))


def normalize(dataset: Dataset, stats: Optional[NormalizationStats] = None):
    """z-score every channel; returns ``(normalized_dataset, stats_used)``.

    Without ``stats`` the per-channel mean and population std are computed over
    all frames of all samples in ``dataset``.
    """
    if stats is None:
        if len(dataset) == 0:
            raise DataError("cannot compute normalization statistics from an empty dataset")
        stats = NormalizationStats.fit(s.frames for s in dataset)
    elif stats.n_channels != dataset.n_channels:
        raise DimensionError(f"stats cover {stats.n_channels} channels, dataset has {dataset.n_channels}")
    samples = [replace(s, frames=stats.apply(s.frames)) for s in dataset]
    return Dataset(samples, dataset.channel_names), stats


def split(dataset: Dataset, train, seed=0):
    """Seeded train/test split.

    ``train`` is either a mapping ``label -> number of training clips`` (labels
    not mentioned go entirely to the test set) or a fraction in [0, 1] applied
    per label. Returns ``(train_set, test_set)``; both keep the input order.
    """
    rng = np.random.default_rng(seed)
    by_label = {}
    for idx, s in enumerate(dataset):
        by_label.setdefault(s.label, []).append(idx)

    chosen = set()
    for label in sorted(by_label, key=lambda v: (v is None, str(v))):
        idxs = by_label[label]
        if isinstance(train, dict):
            n = int(train.get(label, 0))
            if n > len(idxs):
                raise DataError(f"label {label!r}: requested {n} training clips, only {len(idxs)} available")
        else:
            frac = float(train)
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"train fraction must lie in [0, 1], got {frac}")
            n = int(round(frac * len(idxs)))
        perm = rng.permutation(len(idxs))
        chosen.update(idxs[i] for i in perm[:n])
    if isinstance(train, dict):
        unknown = set(train) - set(by_label)
        if unknown:
            raise DataError(f"labels not present in dataset: {sorted(map(str, unknown))}")

    train_samples = [s for i, s in enumerate(dataset) if i in chosen]
    test_samples = [s for i, s in enumerate(dataset) if i not in chosen]
    return Dataset(train_samples, dataset.channel_names), Dataset(test_samples, dataset.channel_names)


# -- CSV I/O -------------------------------------------------------------


@dataclass(frozen=True)
class PoseSchema:
    """How to interpret pose CSV files.

    channels: expected channel order; ``None`` accepts the file header.
    clip_id_column: when set, one file holds many clips keyed by this column.
    label_column: per-row label column (multi-clip files only).
    label_pattern: regex with a ``label`` group matched against the file name.
    """

    channels: Optional[Sequence[str]] = None
    clip_id_column: Optional[str] = None
    label_column: Optional[str] = None
    label_pattern: Optional[str] = None
    frame_rate: Optional[float] = None


def _parse_cell(text, path, line_no, column):
    try:
        value = float(text)
    except ValueError:
        raise PoseFormatError(f"{path}: row {line_no}, column {column!r}: non-numeric value {text!r}") from None
    if not np.isfinite(value):
        raise PoseFormatError(f"{path}: row {line_no}, column {column!r}: non-finite value {text!r}")
    return value


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise PoseFormatError(f"{path}: cannot read file: {exc.strerror}") from exc


def read_pose_frames(path, channels=None):
    """Parse one single-clip pose CSV; returns ``(frames, channel_names)``."""
    rows = _read_rows(path)
    if not rows:
        raise PoseFormatError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "frame":
        raise PoseFormatError(f"{path}: header must start with 'frame', got {header[:1]}")
    names = header[1:]
    if not names:
        raise PoseFormatError(f"{path}: header declares no channels")
    if channels is not None:
        missing = [c for c in channels if c not in names]
        if missing:
            raise PoseFormatError(f"{path}: missing columns {missing}")
        order = [names.index(c) for c in channels]
        names = list(channels)
    else:
        order = list(range(len(names)))

    frames = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise PoseFormatError(f"{path}: row {line_no} has {len(row)} cells, header has {len(header)}")
        values = [_parse_cell(row[j + 1], path, line_no, header[j + 1]) for j in order]
        frames.append(values)
    if not frames:
        raise PoseFormatError(f"{path}: no frame rows")
    return np.array(frames, dtype=np.float64), names


def load_pose_csv(path, schema: Optional[PoseSchema] = None) -> Dataset:
    """Load a pose CSV into a :class:`Dataset`.

    By default the file is one clip whose ``clip_id`` is the file stem. With
    ``schema.clip_id_column`` the file may hold several clips, rows grouped by
    that column in order of first appearance.
    """
    schema = schema or PoseSchema()
    path = Path(path)
    label = None
    if schema.label_pattern is not None:
        m = re.search(schema.label_pattern, path.name)
        if m is None:
            raise PoseFormatError(f"{path}: file name does not match label pattern {schema.label_pattern!r}")
        label = m.group("label")

    if schema.clip_id_column is None:
        frames, names = read_pose_frames(path, schema.channels)
        return Dataset([Sample(frames, path.stem, label, schema.frame_rate)], names)

    rows = _read_rows(path)
    if not rows:
        raise PoseFormatError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    reserved = {"frame", schema.clip_id_column, schema.label_column}
    if schema.clip_id_column not in header:
        raise PoseFormatError(f"{path}: missing column {schema.clip_id_column!r}")
    if schema.label_column is not None and schema.label_column not in header:
        raise PoseFormatError(f"{path}: missing column {schema.label_column!r}")
    names = list(schema.channels) if schema.channels is not None else [h for h in header if h not in reserved]
    missing = [c for c in names if c not in header]
    if missing:
        raise PoseFormatError(f"{path}: missing columns {missing}")
    cid_j = header.index(schema.clip_id_column)
    lab_j = header.index(schema.label_column) if schema.label_column else None
    chan_j = [header.index(c) for c in names]

    clips = {}
    labels = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise PoseFormatError(f"{path}: row {line_no} has {len(row)} cells, header has {len(header)}")
        cid = row[cid_j]
        clips.setdefault(cid, []).append([_parse_cell(row[j], path, line_no, header[j]) for j in chan_j])
        if lab_j is not None:
            lab = row[lab_j]
            if labels.setdefault(cid, lab) != lab:
                raise PoseFormatError(f"{path}: row {line_no}: clip {cid!r} has conflicting labels")
    samples = [
        Sample(np.array(f, dtype=np.float64), cid, labels.get(cid, label), schema.frame_rate)
        for cid, f in clips.items()
    ]
    return Dataset(samples, names)


def format_float(value):
    """Shortest decimal text that parses back to the identical float64."""
    return repr(float(value))


def pose_csv_text(frames, channel_names):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame", *channel_names])
    for t, row in enumerate(np.asarray(frames, dtype=np.float64)):
        writer.writerow([t, *(format_float(v) for v in row)])
    return buf.getvalue()


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pose_csv(sample: Sample, path, channel_names):
    atomic_write_text(path, pose_csv_text(sample.frames, channel_names))


def read_manifest(path):
    """Return ``[(clip_id, label, path), ...]``; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PoseFormatError(f"{path}: cannot read manifest: {exc.strerror}") from exc
    entries = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = next(csv.reader([stripped]))
        if len(parts) != 3:
            raise PoseFormatError(f"{path}: line {line_no}: expected 'clip_id,label,path', got {stripped!r}")
        entries.append(tuple(p.strip() for p in parts))
    return entries


def load_manifest(path, schema: Optional[PoseSchema] = None) -> Dataset:
    """Load every clip listed in a manifest, labelled per the manifest."""
    schema = schema or PoseSchema()
    path = Path(path)
    entries = read_manifest(path)
    samples = []
    channel_names = list(schema.channels) if schema.channels is not None else None
    for clip_id, label, rel in entries:
        frames, names = read_pose_frames(path.parent / rel, channel_names)
        if channel_names is None:
            channel_names = names
        samples.append(Sample(frames, clip_id, label or None, schema.frame_rate))
    return Dataset(samples, channel_names or ())


def write_dataset(dataset: Dataset, out_dir, manifest_name="manifest.csv"):
    """Write one pose CSV per clip plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    lines = []
    for s in dataset:
        rel = f"{s.clip_id}.csv"
        write_pose_csv(s, out_dir / rel, dataset.channel_names)
        lines.append(f"{s.clip_id},{s.label or ''},{rel}\n")
    manifest = out_dir / manifest_name
    atomic_write_text(manifest, "".join(lines))
    return manifest
