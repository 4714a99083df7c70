"""Fixed random echo state reservoirs.

A reservoir is never trained. It is drawn once from a seeded generator and
then used to turn every input sequence into a trajectory of network states::

    x(n+1) = tanh(W x(n) + W_in p(n+1) + b),   x(0) = 0
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_sequence, check_vector
from .exceptions import DataError, DimensionError, ReservoirConstructionError

# tanh rounds to exactly +-1.0 in float64 once |a| > ~19.1; states must stay in the open interval.
_STATE_BOUND = np.nextafter(1.0, 0.0)

POWER_ITERATION_TOL = 1e-12
POWER_ITERATION_MAX_ITER = 10_000


@dataclass(frozen=True)
class ReservoirParams:
    n_neurons: int = 100
    n_inputs: int = 1
    spectral_radius: float = 0.9
    input_scale: float = 1.0
    bias_scale: float = 0.2
    connectivity: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if int(self.n_neurons) != self.n_neurons or self.n_neurons < 1:
            raise ValueError(f"n_neurons must be a positive integer, got {self.n_neurons!r}")
        if int(self.n_inputs) != self.n_inputs or self.n_inputs < 1:
            raise ValueError(f"n_inputs must be a positive integer, got {self.n_inputs!r}")
        if not self.spectral_radius > 0:
            raise ValueError(f"spectral_radius must be > 0, got {self.spectral_radius!r}")
        if not self.input_scale > 0:
            raise ValueError(f"input_scale must be > 0, got {self.input_scale!r}")
        if not self.bias_scale >= 0:
            raise ValueError(f"bias_scale must be >= 0, got {self.bias_scale!r}")
        if not 0 < self.connectivity <= 1:
            raise ValueError(f"connectivity must lie in (0, 1], got {self.connectivity!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Reservoir:
    """Scaled recurrent weights ``W``, input weights ``W_in`` and bias ``b``."""

    W: np.ndarray
    W_in: np.ndarray
    b: np.ndarray
    params: ReservoirParams

    def __post_init__(self):
        n, k = self.params.n_neurons, self.params.n_inputs
        if self.W.shape != (n, n) or self.W_in.shape != (n, k) or self.b.shape != (n,):
            raise DimensionError(
                f"reservoir arrays {self.W.shape}, {self.W_in.shape}, {self.b.shape} "
                f"inconsistent with N={n}, K={k}"
            )
        for arr in (self.W, self.W_in, self.b):
            arr.setflags(write=False)

    @property
    def n_neurons(self):
        return self.params.n_neurons

    @property
    def n_inputs(self):
        return self.params.n_inputs


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """Post-washout reservoir states, one row per time step (shape ``(t, N)``)."""

    states: np.ndarray
    washout_dropped: int = 0
    source_label: Optional[str] = None
    clip_id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] < 1:
            raise DataError(f"trajectory needs at least one state, got shape {self.states.shape}")

    def __len__(self):
        return self.states.shape[0]

    @property
    def n_neurons(self):
        return self.states.shape[1]


def spectral_radius(W, tol=POWER_ITERATION_TOL, max_iter=POWER_ITERATION_MAX_ITER, block_size=8):
    """Largest eigenvalue modulus of a square matrix by block power iteration.

    A single power vector never settles when the dominant eigenvalue is one of
    a complex-conjugate pair, which is the usual case for random nonsymmetric
    matrices, so a small orthonormal block is iterated instead and the modulus
    is read off the Ritz values of the projected matrix.
    """
    W = np.asarray(W, dtype=np.float64)
    n = W.shape[0]
    if W.shape != (n, n):
        raise DimensionError(f"spectral radius needs a square matrix, got {W.shape}")
    p = min(n, block_size)
    start = np.random.default_rng(0x5EED).standard_normal((n, p))
    Q, _ = np.linalg.qr(start)
    previous = None
    for _ in range(max_iter):
        Q, _ = np.linalg.qr(W @ Q)
        ritz = np.linalg.eigvals(Q.T @ W @ Q)
        rho = float(np.max(np.abs(ritz)))
        if previous is not None and abs(rho - previous) <= tol * max(rho, np.finfo(float).tiny):
            return rho
        previous = rho
    raise ReservoirConstructionError(
        f"power iteration did not converge within {max_iter} iterations; "
        "try a different seed or connectivity"
    )


def build_reservoir(params: ReservoirParams) -> Reservoir:
    """Draw a reservoir from ``params.seed`` and rescale ``W`` to the target spectral radius.

    Draw order is fixed (raw W, sparsity mask, W_in, b) so identical params
    always give bit-identical matrices.
    """
    n, k = params.n_neurons, params.n_inputs
    rng = np.random.default_rng(params.seed)
    raw = rng.uniform(-1.0, 1.0, size=(n, n))
    n_nonzero = max(1, int(round(params.connectivity * n * n)))
    keep = rng.choice(n * n, size=n_nonzero, replace=False)
    mask = np.zeros(n * n, dtype=bool)
    mask[keep] = True
    raw = np.where(mask.reshape(n, n), raw, 0.0)
    W_in = params.input_scale * rng.uniform(-1.0, 1.0, size=(n, k))
    b = params.bias_scale * rng.uniform(-1.0, 1.0, size=n)

    rho = spectral_radius(raw)
    if rho <= 1e-12:
        raise ReservoirConstructionError(
            f"raw recurrent matrix has spectral radius {rho:.3g} (seed={params.seed}, "
            f"connectivity={params.connectivity}); choose a different seed or a higher connectivity"
        )
    W = raw * (params.spectral_radius / rho)
    return Reservoir(W=W, W_in=W_in, b=b, params=params)


def step(res: Reservoir, x, p):
    """One state update ``tanh(W x + W_in p + b)``."""
    x = check_vector(x, res.n_neurons, "state x")
    p = check_vector(p, res.n_inputs, "input p")
    return np.clip(np.tanh(res.W @ x + res.W_in @ p + res.b), -_STATE_BOUND, _STATE_BOUND)


def drive(res: Reservoir, sample, washout=0, x0=None) -> StateTrajectory:
    """Run the reservoir over every frame of ``sample`` starting from ``x0`` (zeros by default).

    ``sample`` is a ``(T, K)`` array or any object with a ``frames`` attribute
    (``label`` and ``clip_id`` are carried over when present). The first
    ``washout`` states are dropped.
    """
    washout = int(washout)
    if washout < 0:
        raise ValueError(f"washout must be nonnegative, got {washout}")
    frames = getattr(sample, "frames", sample)
    clip_id = getattr(sample, "clip_id", None)
    name = f"sample {clip_id!r}" if clip_id is not None else "sample"
    frames = check_sequence(frames, n_channels=res.n_inputs, name=name)
    if frames.shape[0] < washout + 1:
        raise DataError(
            f"{name} has {frames.shape[0]} frames; washout={washout} needs at least {washout + 1}"
        )

    drive_in = frames @ res.W_in.T + res.b
    x = np.zeros(res.n_neurons) if x0 is None else check_vector(x0, res.n_neurons, "x0").copy()
    states = np.empty((frames.shape[0], res.n_neurons))
    W = res.W
    for t in range(frames.shape[0]):
        x = np.tanh(W @ x + drive_in[t])
        states[t] = x
    np.clip(states, -_STATE_BOUND, _STATE_BOUND, out=states)
    return StateTrajectory(
        states=states[washout:],
        washout_dropped=washout,
        source_label=getattr(sample, "label", None),
        clip_id=clip_id,
    )
