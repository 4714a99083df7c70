"""Conceptor-based classification of multivariate time series with echo state reservoirs."""

from .classifier import (
    ClassifierModel,
    ConceptorClassifier,
    EvidenceVector,
    TrainingConfig,
    classify,
    morph,
    positive_evidence,
    train,
)
from .conceptor import Conceptor, CorrelationMatrix, compute_conceptor, correlation_matrix, linear_combine, quota
from .dataio import (
    Dataset,
    NormalizationStats,
    PoseSchema,
    Sample,
    load_manifest,
    load_pose_csv,
    normalize,
    split,
    write_dataset,
    write_pose_csv,
)
from .evaluation import ConfusionMatrix, RatingTable, confusion, emit_report, krippendorff_alpha
from .persistence import load_model, save_model
from .reservoir import Reservoir, ReservoirParams, StateTrajectory, build_reservoir, drive, spectral_radius, step
from .synthetic import ClassSpec, SynthSpec, preset, synth_generate

__version__ = "0.1.0"
