"""Seeded synthetic multichannel sinusoid datasets.

Each class is a sum of sinusoids (class-specific frequencies and amplitudes)
plus Gaussian noise. Every channel carries the same components with its own
phase. A class may instead be declared as a mixture of two other classes: its
component list is the union of theirs, amplitudes scaled by ``1 - mixing``
and ``mixing``, which stands in for "intermediate" clips between two extremes.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .dataio import Dataset, Sample


@dataclass(frozen=True)
class ClassSpec:
    label: str
    n_clips: int
    frequencies: Sequence[float] = ()
    amplitudes: Sequence[float] = ()
    noise: float = 0.0
    random_phase: bool = True
    mix_of: Optional[Sequence[str]] = None
    mixing: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        if self.mix_of is not None:
            object.__setattr__(self, "mix_of", tuple(self.mix_of))


@dataclass(frozen=True)
class SynthSpec:
    classes: Sequence[ClassSpec]
    n_channels: int = 9
    length_range: tuple = (120, 300)
    frame_rate: float = 10.0
    channel_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        classes = tuple(c if isinstance(c, ClassSpec) else ClassSpec(**c) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "length_range", tuple(int(v) for v in self.length_range))
        if self.channel_names is not None:
            object.__setattr__(self, "channel_names", tuple(self.channel_names))
        self.validate()

    def validate(self):
        if not self.classes:
            raise ValueError("synthetic spec needs at least one class")
        if self.n_channels < 1:
            raise ValueError(f"n_channels must be >= 1, got {self.n_channels}")
        lo, hi = self.length_range
        if not 1 <= lo <= hi:
            raise ValueError(f"length_range must satisfy 1 <= min <= max, got {self.length_range}")
        if not self.frame_rate > 0:
            raise ValueError("frame_rate must be positive")
        if self.channel_names is not None and len(self.channel_names) != self.n_channels:
            raise ValueError("channel_names length must equal n_channels")
        labels = [c.label for c in self.classes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate class labels in {labels}")
        by_label = {c.label: c for c in self.classes}
        for c in self.classes:
            if c.n_clips < 0:
                raise ValueError(f"class {c.label!r}: n_clips must be >= 0")
            if c.noise < 0:
                raise ValueError(f"class {c.label!r}: noise must be >= 0")
            if c.mix_of is None:
                if len(c.frequencies) != len(c.amplitudes) or not c.frequencies:
                    raise ValueError(f"class {c.label!r}: needs matching, nonempty frequencies and amplitudes")
            else:
                if len(c.mix_of) != 2:
                    raise ValueError(f"class {c.label!r}: mix_of must name exactly two classes")
                for src in c.mix_of:
                    if src not in by_label or by_label[src].mix_of is not None:
                        raise ValueError(f"class {c.label!r}: mix source {src!r} must be a plain class")
                if not 0.0 <= c.mixing <= 1.0:
                    raise ValueError(f"class {c.label!r}: mixing must lie in [0, 1]")

    def names(self):
        return self.channel_names or tuple(f"ch{i}" for i in range(self.n_channels))

    def to_dict(self):
        d = asdict(self)
        d["length_range"] = list(self.length_range)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["classes"] = [ClassSpec(**c) for c in d["classes"]]
        return cls(**d)


def _components(cls: ClassSpec, by_label):
    """Return ``(primary, secondary, noise)`` where each component list is ``[(freq, amp), ...]``."""
    if cls.mix_of is None:
        return list(zip(cls.frequencies, cls.amplitudes)), [], cls.noise
    a, b = (by_label[name] for name in cls.mix_of)
    m = cls.mixing
    primary = [(f, (1.0 - m) * amp) for f, amp in zip(a.frequencies, a.amplitudes)]
    secondary = [(f, m * amp) for f, amp in zip(b.frequencies, b.amplitudes)]
    return primary, secondary, (1.0 - m) * a.noise + m * b.noise


def _sinusoids(components, t, phases):
    # phases: (n_channels, n_components)
    out = np.zeros((t.shape[0], phases.shape[0]))
    for i, (freq, amp) in enumerate(components):
        out += amp * np.sin(2.0 * np.pi * freq * t[:, None] + phases[:, i])
    return out


def _phases(rng, n_channels, n_components, random_phase):
    if random_phase:
        return rng.uniform(0.0, 2.0 * np.pi, size=(n_channels, n_components))
    return np.zeros((n_channels, n_components))


def generate_clip(spec: SynthSpec, class_index: int, clip_index: int, seed: int):
    """Frames for one clip. Each clip has its own seed stream, so clips are independent of spec order."""
    cls = spec.classes[class_index]
    by_label = {c.label: c for c in spec.classes}
    primary, secondary, noise = _components(cls, by_label)
    ss = np.random.SeedSequence(int(seed), spawn_key=(class_index, clip_index))
    len_rng, phase_rng, noise_rng, phase2_rng = (np.random.default_rng(s) for s in ss.spawn(4))

    lo, hi = spec.length_range
    n_frames = int(len_rng.integers(lo, hi + 1))
    t = np.arange(n_frames) / spec.frame_rate
    k = spec.n_channels
    frames = _sinusoids(primary, t, _phases(phase_rng, k, len(primary), cls.random_phase))
    if noise > 0:
        frames = frames + noise * noise_rng.standard_normal((n_frames, k))
    if secondary:
        frames = frames + _sinusoids(secondary, t, _phases(phase2_rng, k, len(secondary), cls.random_phase))
    return frames


def synth_generate(spec: SynthSpec, seed: int = 0) -> Dataset:
    """Generate a labelled dataset; clip ids are ``<label>_<index:04d>``."""
    spec.validate()
    samples = []
    for ci, cls in enumerate(spec.classes):
        for j in range(cls.n_clips):
            frames = generate_clip(spec, ci, j, seed)
            samples.append(Sample(frames, f"{cls.label}_{j:04d}", cls.label, spec.frame_rate))
    return Dataset(samples, spec.names())


# 124 + 230 = 354 clips; a 62/115 training split leaves 177 test clips.
PRESETS = {
    # distinct frequencies and movement energy; "low" moves less than "high"
    "separated": dict(high=((1.2,), (1.0,), 0.2), low=((0.3,), (0.4,), 0.1)),
    # equal energy, neighbouring frequencies, heavy noise
    "overlap": dict(high=((0.8,), (1.0,), 1.2), low=((0.5,), (1.0,), 1.2)),
}


def preset(name, n_high=124, n_low=230, n_channels=9, with_mid=False) -> SynthSpec:
    """Two-class ("high"/"low") spec shaped like the 354-clip engagement corpus.

    ``with_mid`` adds a "mid" class mixing "low" and "high" at 0.5.
    """
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    (hf, ha, hn), (lf, la, ln) = p["high"], p["low"]
    high = dict(frequencies=hf, amplitudes=ha, noise=hn)
    low = dict(frequencies=lf, amplitudes=la, noise=ln)
    classes = [ClassSpec("high", n_high, **high), ClassSpec("low", n_low, **low)]
    if with_mid:
        classes.append(ClassSpec("mid", n_high, mix_of=("low", "high"), mixing=0.5))
    return SynthSpec(classes, n_channels=n_channels)
