"""Scoring: confusion matrices, per-class recall/precision, reports, and Krippendorff's alpha."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .dataio import atomic_write_text
from .exceptions import DataError

UNDEFINED = "undefined"


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts indexed ``[truth, predicted]`` over ``labels``."""

    labels: tuple
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def accuracy(self):
        return float(np.trace(self.counts) / self.total) if self.total else None

    def _index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def support(self, label):
        return int(self.counts[self._index(label)].sum())

    def recall(self, label) -> Optional[float]:
        """Fraction of true ``label`` clips predicted as ``label``; ``None`` when the class has no clips."""
        i = self._index(label)
        row = self.counts[i].sum()
        return float(self.counts[i, i] / row) if row else None

    def precision(self, label) -> Optional[float]:
        i = self._index(label)
        col = self.counts[:, i].sum()
        return float(self.counts[i, i] / col) if col else None

    def row_normalized(self):
        rows = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts, rows, out=np.zeros(self.counts.shape), where=rows > 0)

    def metrics(self):
        """``[(name, value)]`` with ``None`` for undefined ratios."""
        out = [("accuracy", self.accuracy), ("total", self.total)]
        for label in self.labels:
            out.append((f"recall[{label}]", self.recall(label)))
        for label in self.labels:
            out.append((f"precision[{label}]", self.precision(label)))
        for label in self.labels:
            out.append((f"support[{label}]", self.support(label)))
        return out


def confusion(pairs, labels: Optional[Sequence[str]] = None) -> ConfusionMatrix:
    """Tally ``(truth, predicted)`` pairs. Without ``labels`` the sorted union of observed labels is used."""
    pairs = [(str(t), str(p)) for t, p in pairs]
    if not pairs:
        raise DataError("confusion matrix needs at least one prediction")
    if labels is None:
        labels = sorted({v for pair in pairs for v in pair})
    labels = tuple(str(v) for v in labels)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for truth, pred in pairs:
        if truth not in index or pred not in index:
            bad = truth if truth not in index else pred
            raise DataError(f"unknown label {bad!r}; known labels: {list(labels)}")
        counts[index[truth], index[pred]] += 1
    return ConfusionMatrix(labels, counts)


def _fmt(value):
    if value is None:
        return UNDEFINED
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def report_csv(cm: ConfusionMatrix, provenance=None) -> str:
    buf = io.StringIO()
    if provenance is not None:
        buf.write("# config: " + json.dumps(provenance, sort_keys=True) + "\n")
    buf.write("truth,predicted,count\n")
    for i, t in enumerate(cm.labels):
        for j, p in enumerate(cm.labels):
            buf.write(f"{t},{p},{int(cm.counts[i, j])}\n")
    buf.write("metric,value\n")
    for name, value in cm.metrics():
        buf.write(f"{name},{_fmt(value)}\n")
    return buf.getvalue()


def report_svg(cm: ConfusionMatrix, title="confusion matrix", cell=60, provenance=None) -> str:
    """Heatmap whose cell opacity is the row-normalized count (per-class recall on the diagonal)."""
    k = len(cm.labels)
    margin = 110
    width = margin + k * cell + 20
    height = margin + k * cell + 20
    norm = cm.row_normalized()
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(title)}</title>",
    ]
    if provenance is not None:
        out.append(f"<desc>{escape(json.dumps(provenance, sort_keys=True))}</desc>")
    out.append(f'<text x="{margin}" y="20">predicted</text>')
    out.append(f'<text x="10" y="{margin - 10}">truth</text>')
    for j, label in enumerate(cm.labels):
        out.append(f'<text x="{margin + j * cell + 4}" y="{margin - 10}">{escape(label)}</text>')
    for i, truth in enumerate(cm.labels):
        y = margin + i * cell
        out.append(f'<text x="10" y="{y + cell // 2 + 4}">{escape(truth)}</text>')
        for j, pred in enumerate(cm.labels):
            x = margin + j * cell
            out.append(
                f'<rect class="cell" data-truth="{escape(truth)}" data-predicted="{escape(pred)}" '
                f'data-count="{int(cm.counts[i, j])}" x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="#1f4e9c" fill-opacity="{norm[i, j]:.6f}" stroke="#444"/>'
            )
            out.append(
                f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" text-anchor="middle">{int(cm.counts[i, j])}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(cm: ConfusionMatrix, out_dir, stem="report", title=None, provenance=None):
    """Write ``<stem>.csv`` and ``<stem>.svg`` into ``out_dir``; returns both paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create report directory {out_dir}: {exc.strerror}") from exc
    csv_path, svg_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.svg"
    try:
        atomic_write_text(csv_path, report_csv(cm, provenance))
        atomic_write_text(svg_path, report_svg(cm, title or stem, provenance=provenance))
    except OSError as exc:
        raise DataError(f"cannot write report to {out_dir}: {exc.strerror}") from exc
    return csv_path, svg_path


# -- inter-rater agreement -------------------------------------------------


@dataclass(frozen=True, eq=False)
class RatingTable:
    """``raters x items`` ratings with ``NaN`` for missing entries."""

    ratings: np.ndarray
    level: str = "interval"
    scale: Optional[tuple] = None

    def __post_init__(self):
        r = np.array(self.ratings, dtype=np.float64)
        if r.ndim != 2:
            raise DataError(f"ratings must be a raters x items matrix, got shape {r.shape}")
        if self.level not in ("interval", "ordinal"):
            raise ValueError(f"level must be 'interval' or 'ordinal', got {self.level!r}")
        if np.isinf(r).any():
            raise DataError("ratings contain infinite values")
        empty = np.flatnonzero(np.all(np.isnan(r), axis=0))
        if empty.size:
            raise DataError(f"items without any rating: {empty.tolist()}")
        if self.scale is not None:
            lo, hi = self.scale
            present = r[~np.isnan(r)]
            if np.any((present < lo) | (present > hi)):
                raise DataError(f"ratings outside the declared scale [{lo}, {hi}]")
        object.__setattr__(self, "ratings", r)

    @classmethod
    def from_rows(cls, rows, level="interval", scale=None, missing=None):
        """Build from nested lists where ``missing`` (default ``None``) marks absent ratings."""
        data = [[np.nan if v is missing or v is None else float(v) for v in row] for row in rows]
        return cls(np.array(data, dtype=np.float64), level, scale)


def coincidence_matrix(table: RatingTable):
    """Return ``(values, o)`` where ``o[c, k]`` is the coincidence count of values ``c`` and ``k``."""
    r = table.ratings
    units = []
    for col in r.T:
        present = col[~np.isnan(col)]
        if present.size >= 2:
            units.append(present)
    if not units:
        raise DataError("no item has two or more ratings; alpha is undefined")
    values = np.unique(np.concatenate(units))
    index = {v: i for i, v in enumerate(values)}
    o = np.zeros((values.size, values.size))
    for unit in units:
        n_u = np.zeros(values.size)
        for v in unit:
            n_u[index[v]] += 1
        o += (np.outer(n_u, n_u) - np.diag(n_u)) / (unit.size - 1)
    return values, o


def _delta2(values, margins, level):
    if level == "interval":
        return (values[:, None] - values[None, :]) ** 2
    cum = np.concatenate([[0.0], np.cumsum(margins)])
    lo = np.minimum.outer(np.arange(values.size), np.arange(values.size))
    hi = np.maximum.outer(np.arange(values.size), np.arange(values.size))
    between = cum[hi + 1] - cum[lo]
    return (between - (margins[:, None] + margins[None, :]) / 2.0) ** 2


def krippendorff_alpha(table: RatingTable) -> float:
    """``1 - D_o / D_e`` with interval or ordinal distances; missing ratings are simply not paired."""
    values, o = coincidence_matrix(table)
    margins = o.sum(axis=1)
    n = margins.sum()
    if n < 2:
        raise DataError("fewer than two pairable values; alpha is undefined")
    d2 = _delta2(values, margins, table.level)
    d_obs = float((o * d2).sum() / n)
    if d_obs == 0.0:
        return 1.0
    d_exp = float((np.outer(margins, margins) * d2).sum() / (n * (n - 1)))
    return 1.0 - d_obs / d_exp
