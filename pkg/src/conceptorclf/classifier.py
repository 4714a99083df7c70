"""Conceptor-based sequence classification.

Training drives the reservoir once per clip, pools the post-washout states of
each class into a correlation matrix and turns that into one conceptor per
class. A new clip is classified by driving it through the same reservoir and
picking the class whose conceptor gives the largest positive evidence
``z^T C_j z`` (averaged over the clip's states).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_labels, check_sequences
from .conceptor import Conceptor, compute_conceptor, correlation_matrix, linear_combine
from .dataio import Dataset, NormalizationStats, Sample
from .exceptions import DataError, DimensionError, NumericalError
from .reservoir import Reservoir, ReservoirParams, StateTrajectory, build_reservoir, drive

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
# R_j = X_j X_j^T / (number of pooled state vectors), recorded in every model.
CORRELATION_NORMALIZATION = "pooled_state_vectors"
EVIDENCE_AGGREGATION = "time_mean"


@dataclass(frozen=True)
class TrainingConfig:
    n_neurons: int = 100
    spectral_radius: float = 0.9
    input_scale: float = 0.2
    bias_scale: float = 0.2
    connectivity: float = 0.1
    seed: int = 0
    washout: int = 10
    aperture: float = 10.0
    normalize: bool = True

    def __post_init__(self):
        if int(self.washout) != self.washout or self.washout < 0:
            raise ValueError(f"washout must be a nonnegative integer, got {self.washout!r}")
        if not self.aperture > 0:
            raise ValueError(f"aperture must be positive, got {self.aperture!r}")

    def reservoir_params(self, n_inputs) -> ReservoirParams:
        return ReservoirParams(
            n_neurons=self.n_neurons,
            n_inputs=n_inputs,
            spectral_radius=self.spectral_radius,
            input_scale=self.input_scale,
            bias_scale=self.bias_scale,
            connectivity=self.connectivity,
            seed=self.seed,
        )

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class EvidenceVector:
    labels: tuple
    values: np.ndarray

    def __getitem__(self, label):
        return float(self.values[self.labels.index(label)])

    def as_dict(self):
        return dict(zip(self.labels, self.values.tolist()))

    def argmax(self):
        # labels are kept sorted, so the first maximum is the lexicographically smallest tie.
        return self.labels[int(np.argmax(self.values))]


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    reservoir: Reservoir
    conceptors: tuple
    preprocessing: NormalizationStats
    config: TrainingConfig
    channel_names: tuple = ()
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        concs = tuple(sorted(self.conceptors, key=lambda c: c.label))
        object.__setattr__(self, "conceptors", concs)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        labels = [c.label for c in concs]
        if len(concs) < 2:
            raise ValueError("a classifier model needs at least two conceptors")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate conceptor labels: {labels}")
        n = self.reservoir.n_neurons
        for c in concs:
            if c.n_neurons != n:
                raise DimensionError(f"conceptor {c.label!r} has dimension {c.n_neurons}, reservoir has {n}")
        if self.preprocessing.n_channels != self.reservoir.n_inputs:
            raise DimensionError("normalization stats and reservoir disagree on the channel count")

    @property
    def labels(self):
        return tuple(c.label for c in self.conceptors)

    @property
    def n_channels(self):
        return self.reservoir.n_inputs

    def conceptor(self, label) -> Conceptor:
        for c in self.conceptors:
            if c.label == label:
                return c
        raise KeyError(f"no conceptor labelled {label!r}; available: {list(self.labels)}")

    def with_conceptors(self, conceptors):
        return replace(self, conceptors=tuple(conceptors))


def _frames(sample):
    return getattr(sample, "frames", sample)


def harvest(reservoir, stats, sample, washout) -> StateTrajectory:
    """Normalize ``sample`` with ``stats`` and drive the reservoir over it."""
    frames = stats.apply(_frames(sample))
    traj = drive(reservoir, frames, washout)
    return StateTrajectory(
        traj.states,
        traj.washout_dropped,
        getattr(sample, "label", None),
        getattr(sample, "clip_id", None),
    )


def train(train_set: Dataset, config: Optional[TrainingConfig] = None) -> ClassifierModel:
    """Fit one conceptor per label found in ``train_set``."""
    config = config or TrainingConfig()
    if len(train_set) == 0:
        raise DataError("training set is empty")
    unlabeled = [s.clip_id for s in train_set if s.label is None]
    if unlabeled:
        raise DataError(f"training clips without a label: {unlabeled[:5]}")
    labels = train_set.label_set()
    if len(labels) < 2:
        raise DataError(f"training needs at least two distinct labels, got {labels}")

    stats = (
        NormalizationStats.fit(s.frames for s in train_set)
        if config.normalize
        else NormalizationStats.identity(train_set.n_channels)
    )
    reservoir = build_reservoir(config.reservoir_params(train_set.n_channels))

    per_label = {label: [] for label in labels}
    for s in train_set:
        if s.n_frames < config.washout + 1:
            warnings.warn(
                f"skipping clip {s.clip_id!r}: {s.n_frames} frames, washout={config.washout}",
                stacklevel=2,
            )
            continue
        traj = harvest(reservoir, stats, s, config.washout)
        if not np.all(np.isfinite(traj.states)):
            raise NumericalError(f"clip {s.clip_id!r} produced non-finite reservoir states")
        per_label[s.label].append(traj)

    conceptors = []
    for label in labels:
        if not per_label[label]:
            raise DataError(f"class {label!r} has no clip longer than the washout ({config.washout} frames)")
        R = correlation_matrix(per_label[label])
        conceptors.append(compute_conceptor(R, config.aperture, label))
        logger.debug("class %s: %d clips, %d states", label, len(per_label[label]), R.n_state_vectors)

    return ClassifierModel(
        reservoir=reservoir,
        conceptors=tuple(conceptors),
        preprocessing=stats,
        config=config,
        channel_names=train_set.channel_names,
    )


def positive_evidence(model: ClassifierModel, trajectory) -> EvidenceVector:
    """Per-class mean of ``z^T C_j z`` over the states ``z`` of ``trajectory``."""
    Z = np.asarray(getattr(trajectory, "states", trajectory), dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[None, :]
    n = model.reservoir.n_neurons
    if Z.ndim != 2 or Z.shape[1] != n or Z.shape[0] == 0:
        raise DimensionError(f"trajectory must have shape (t >= 1, {n}), got {Z.shape}")
    values = np.empty(len(model.conceptors))
    for j, c in enumerate(model.conceptors):
        values[j] = np.mean(np.sum((Z @ c.C) * Z, axis=1))
    # C is PSD, so anything below zero here is rounding.
    np.maximum(values, 0.0, out=values)
    return EvidenceVector(model.labels, values)


def classify(model: ClassifierModel, sample):
    """Return ``(label, evidence)`` for one clip (a :class:`Sample` or ``(T, K)`` array)."""
    frames = _frames(sample)
    clip_id = getattr(sample, "clip_id", None)
    name = f"clip {clip_id!r}" if clip_id is not None else "sample"
    (frames,) = check_sequences(
        [frames], n_channels=model.n_channels, min_length=model.config.washout + 1, names=[name]
    )
    traj = harvest(model.reservoir, model.preprocessing, frames, model.config.washout)
    evidence = positive_evidence(model, traj)
    return evidence.argmax(), evidence


def morph_label(label_a, label_b, weight):
    return f"{label_a}~{label_b}@{weight:g}"


def morph(model: ClassifierModel, label_a, label_b, weight, label=None) -> ClassifierModel:
    """Add the conceptor ``weight * C_a + (1 - weight) * C_b`` to a copy of ``model``."""
    weight = float(weight)
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    a, b = model.conceptor(label_a), model.conceptor(label_b)
    label = label or morph_label(label_a, label_b, weight)
    if label in model.labels:
        raise ValueError(f"model already has a conceptor labelled {label!r}")
    mid = linear_combine([a, b], [weight, 1.0 - weight], label=label)
    return model.with_conceptors(model.conceptors + (mid,))


class ConceptorClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`train` and :func:`classify`.

    ``X`` is a list of ``(n_frames, n_channels)`` arrays of varying length.

    Parameters
    ----------
    n_neurons, spectral_radius, input_scale, bias_scale, connectivity :
        Reservoir construction parameters.
    washout : int
        Number of initial states discarded per clip.
    aperture : float
        Conceptor aperture.
    normalize : bool
        z-score channels with statistics frozen at fit time.
    random_state : int
        Seed for the reservoir weights.
    """

    def __init__(
        self,
        n_neurons=100,
        spectral_radius=0.9,
        input_scale=0.2,
        bias_scale=0.2,
        connectivity=0.1,
        washout=10,
        aperture=10.0,
        normalize=True,
        random_state=0,
    ):
        self.n_neurons = n_neurons
        self.spectral_radius = spectral_radius
        self.input_scale = input_scale
        self.bias_scale = bias_scale
        self.connectivity = connectivity
        self.washout = washout
        self.aperture = aperture
        self.normalize = normalize
        self.random_state = random_state

    def _config(self):
        seed = self.random_state
        if seed is None:
            seed = int(np.random.default_rng().integers(2**63))
        return TrainingConfig(
            n_neurons=self.n_neurons,
            spectral_radius=self.spectral_radius,
            input_scale=self.input_scale,
            bias_scale=self.bias_scale,
            connectivity=self.connectivity,
            seed=int(seed),
            washout=self.washout,
            aperture=self.aperture,
            normalize=self.normalize,
        )

    def fit(self, X, y):
        seqs = check_sequences(X)
        labels = check_labels(y, len(seqs))
        k = seqs[0].shape[1]
        samples = [Sample(s, f"clip{i}", lab) for i, (s, lab) in enumerate(zip(seqs, labels))]
        dataset = Dataset(samples, [f"ch{i}" for i in range(k)])
        return self._set_model(train(dataset, self._config()))

    @classmethod
    def from_model(cls, model: ClassifierModel):
        """Wrap an existing (e.g. loaded or morphed) model as a fitted estimator."""
        cfg = model.config
        est = cls(
            n_neurons=cfg.n_neurons,
            spectral_radius=cfg.spectral_radius,
            input_scale=cfg.input_scale,
            bias_scale=cfg.bias_scale,
            connectivity=cfg.connectivity,
            washout=cfg.washout,
            aperture=cfg.aperture,
            normalize=cfg.normalize,
            random_state=cfg.seed,
        )
        return est._set_model(model)

    def _set_model(self, model):
        self.model_ = model
        self.classes_ = np.array(model.labels)
        self.n_features_in_ = model.n_channels
        self.reservoir_ = model.reservoir
        self.conceptors_ = {c.label: c for c in model.conceptors}
        return self

    def decision_function(self, X):
        """Evidence matrix of shape ``(n_sequences, n_classes)``, columns ordered as ``classes_``."""
        check_is_fitted(self, "model_")
        seqs = check_sequences(X, n_channels=self.n_features_in_, min_length=self.model_.config.washout + 1)
        return np.vstack([classify(self.model_, s)[1].values for s in seqs])

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def transform(self, X):
        """Reservoir state trajectories (after normalization and washout) for each sequence."""
        check_is_fitted(self, "model_")
        seqs = check_sequences(X, n_channels=self.n_features_in_, min_length=self.model_.config.washout + 1)
        m = self.model_
        return [harvest(m.reservoir, m.preprocessing, s, m.config.washout).states for s in seqs]
