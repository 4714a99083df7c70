"""State correlation matrices, conceptors, and convex combinations of conceptors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from .exceptions import DataError, DimensionError, NumericalError

SYMMETRY_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    R: np.ndarray
    n_state_vectors: int

    @property
    def n_neurons(self):
        return self.R.shape[0]


@dataclass(frozen=True, eq=False)
class Conceptor:
    C: np.ndarray
    aperture: float
    label: str

    def __post_init__(self):
        C = self.C
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise DimensionError(f"conceptor must be square, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise NumericalError(f"conceptor {self.label!r} has non-finite entries")
        asym = float(np.max(np.abs(C - C.T))) if C.size else 0.0
        if asym > SYMMETRY_TOL:
            raise NumericalError(f"conceptor {self.label!r} is not symmetric (max asymmetry {asym:.3g})")
        C.setflags(write=False)

    @property
    def n_neurons(self):
        return self.C.shape[0]

    def eigenvalues(self):
        """Ascending spectrum of ``C``."""
        return linalg.eigvalsh(self.C)


def correlation_matrix(trajectories) -> CorrelationMatrix:
    """Pool the states of all trajectories and return ``X X^T / n``.

    ``n`` is the total number of pooled state vectors, not the number of
    trajectories, so long clips do not inflate ``R``.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise DataError("correlation matrix needs at least one trajectory")
    blocks = []
    n_neurons = None
    for i, traj in enumerate(trajectories):
        states = np.asarray(getattr(traj, "states", traj), dtype=np.float64)
        if states.ndim != 2 or states.shape[0] == 0:
            raise DataError(f"trajectory {i} is empty")
        if n_neurons is None:
            n_neurons = states.shape[1]
        elif states.shape[1] != n_neurons:
            raise DimensionError(f"trajectory {i} has dimension {states.shape[1]}, expected {n_neurons}")
        blocks.append(states)
    X = np.concatenate(blocks, axis=0)
    R = X.T @ X / X.shape[0]
    R = 0.5 * (R + R.T)
    return CorrelationMatrix(R=R, n_state_vectors=X.shape[0])


def compute_conceptor(R, aperture=10.0, label="") -> Conceptor:
    """``C = R (R + aperture**-2 I)^-1``, solved through a Cholesky factorization.

    ``R`` may be a :class:`CorrelationMatrix` or a bare symmetric PSD array.
    """
    R = np.asarray(getattr(R, "R", R), dtype=np.float64)
    if not aperture > 0 or not np.isfinite(aperture):
        raise ValueError(f"aperture must be a positive finite number, got {aperture!r}")
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DimensionError(f"correlation matrix must be square, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise NumericalError("correlation matrix has non-finite entries")

    n = R.shape[0]
    A = R + aperture ** -2 * np.eye(n)
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"R + aperture^-2 I is not positive definite: {exc}") from exc
    # R and A commute, so A^-1 R == R A^-1.
    C = linalg.cho_solve(factor, R, check_finite=False)
    C = 0.5 * (C + C.T)
    if not np.all(np.isfinite(C)):
        raise NumericalError("conceptor solve produced non-finite entries")
    return Conceptor(C=C, aperture=float(aperture), label=str(label))


def linear_combine(conceptors: Sequence[Conceptor], weights, label=None) -> Conceptor:
    """Convex combination ``sum_i w_i C_i`` of two or more conceptors."""
    conceptors = list(conceptors)
    w = np.asarray(weights, dtype=np.float64)
    if len(conceptors) < 2:
        raise ValueError("linear_combine needs at least two conceptors")
    if w.shape != (len(conceptors),):
        raise ValueError(f"expected {len(conceptors)} weights, got {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"weights must be finite and nonnegative, got {w.tolist()}")
    if abs(float(w.sum()) - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1, got {float(w.sum())!r}")
    n = conceptors[0].n_neurons
    for c in conceptors[1:]:
        if c.n_neurons != n:
            raise DimensionError(f"conceptor {c.label!r} has dimension {c.n_neurons}, expected {n}")

    C = np.zeros((n, n))
    for wi, c in zip(w, conceptors):
        C += wi * c.C
    if label is None:
        label = "+".join(f"{wi:g}*{c.label}" for wi, c in zip(w, conceptors))
    apertures = {c.aperture for c in conceptors}
    aperture = apertures.pop() if len(apertures) == 1 else float(np.dot(w, [c.aperture for c in conceptors]))
    return Conceptor(C=C, aperture=aperture, label=label)


def quota(c: Conceptor) -> float:
    """Mean eigenvalue of the conceptor, ``trace(C) / N``."""
    return float(np.trace(c.C) / c.n_neurons)
