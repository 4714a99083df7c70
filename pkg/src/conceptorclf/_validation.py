"""Input validation helpers for ragged collections of multivariate sequences.

scikit-learn's ``check_array`` expects one rectangular matrix; the estimators
here take a list of ``(n_frames, n_channels)`` arrays whose lengths differ, so
each sequence is checked individually and then the collection as a whole.
"""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DataError, DimensionError


def check_sequence(x, *, n_channels=None, min_length=1, name="sequence"):
    """Validate one sequence and return it as a C-contiguous float64 array.

    A 1-D input is treated as a single-channel sequence.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    try:
        arr = check_array(
            arr,
            dtype=np.float64,
            ensure_all_finite=True,
            ensure_min_samples=1,
            order="C",
            input_name=name,
        )
    except ValueError as exc:
        raise DataError(f"{name}: {exc}") from exc
    if n_channels is not None and arr.shape[1] != n_channels:
        raise DimensionError(
            f"{name}: expected {n_channels} channels, got {arr.shape[1]}"
        )
    if arr.shape[0] < min_length:
        raise DataError(
            f"{name}: has {arr.shape[0]} frames, needs at least {min_length}"
        )
    return arr


def check_sequences(X, *, n_channels=None, min_length=1, names=None):
    """Validate a list of sequences that must share a channel count.

    Returns a list of float64 arrays. ``names`` (optional) labels each
    sequence in error messages, e.g. clip ids.
    """
    if isinstance(X, np.ndarray) and X.ndim == 2:
        X = [X]
    seqs = list(X)
    if names is None:
        names = [f"sequence {i}" for i in range(len(seqs))]
    out = []
    for seq, name in zip(seqs, names):
        arr = check_sequence(seq, n_channels=n_channels, min_length=min_length, name=name)
        if n_channels is None:
            n_channels = arr.shape[1]
        out.append(arr)
    return out


def check_labels(y, n_samples):
    labels = [str(v) for v in y]
    if len(labels) != n_samples:
        raise DimensionError(f"got {n_samples} sequences but {len(labels)} labels")
    return labels


def check_vector(v, size, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (size,):
        raise DimensionError(f"{name}: expected shape ({size},), got {arr.shape}")
    return arr
