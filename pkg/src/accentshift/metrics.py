"""Accent-shift evaluation metrics.

Covers the classifier-probability summaries, speaker-embedding cosine
similarity, corpus-level phoneme shift rate, naturalness averaging, and a
Gaussian kernel density estimate of per-utterance change counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np


class Accent(IntEnum):
    """Classifier head order: index into a 3-logit row."""

    NORTH_AMERICAN = 0
    BRITISH_ISLES = 1
    OTHER = 2


def softmax(logits: Sequence[float] | np.ndarray) -> np.ndarray:
    """Max-shifted softmax over one logit row."""
    arr = np.asarray(logits, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-d logit row, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("logits must be finite")
    shifted = arr - arr.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def mean_target_prob(
    logit_rows: Iterable[Sequence[float]], target: Accent
) -> float:
    """Mean softmax probability of ``target`` across rows, as a percentage."""
    probs = [softmax(row)[int(target)] for row in logit_rows]
    if not probs:
        raise ValueError("no logit rows to average")
    return 100.0 * float(np.mean(probs))


def group_reference(embeddings: Iterable[Sequence[float]]) -> np.ndarray:
    """Arithmetic mean of the embeddings; no renormalization."""
    rows = [np.asarray(e, dtype=float) for e in embeddings]
    if not rows:
        raise ValueError("no embeddings to average")
    dims = {row.shape for row in rows}
    if len(dims) != 1 or rows[0].ndim != 1:
        raise ValueError(f"embeddings must share one 1-d shape, got {sorted(dims)}")
    return np.mean(rows, axis=0)


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vectors")
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class PsrCounts:
    """Per-utterance applicable (n1) and surviving (n2) rule-site counts."""

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError(f"counts must be non-negative, got n1={self.n1} n2={self.n2}")


def psr_from_totals(n1_total: int, n2_total: int) -> float:
    """Phoneme shift rate as the ratio of corpus totals (not a mean of ratios).

    Unclamped: recognition can surface more shift sites than the source had,
    so values above 1 are legal.
    """
    if n1_total < 0 or n2_total < 0:
        raise ValueError("totals must be non-negative")
    if n1_total == 0:
        raise ValueError("corpus has no applicable rule sites (total n1 is zero)")
    return n2_total / n1_total


def corpus_psr(counts: Iterable[PsrCounts]) -> float:
    """Phoneme shift rate over a corpus of per-utterance counts."""
    n1_total = 0
    n2_total = 0
    for c in counts:
        n1_total += c.n1
        n2_total += c.n2
    return psr_from_totals(n1_total, n2_total)


def mean_utmos(scores: Iterable[float]) -> float:
    """Average naturalness score; each value must lie in [1, 5]."""
    vals = [float(s) for s in scores]
    if not vals:
        raise ValueError("no scores to average")
    for s in vals:
        if not (1.0 <= s <= 5.0) or not math.isfinite(s):
            raise ValueError(f"score {s!r} outside [1, 5]")
    return float(np.mean(vals))


BANDWIDTH_FLOOR = 0.25

# Integer-count samples need node spacing well under the bandwidth for the
# trapezoid mass check below to hold on spiky inputs.
_MAX_NODE_SPACING_FRACTION = 0.5
_INTEGRAL_TOLERANCE = 0.01

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def silverman_bandwidth(values: Sequence[float] | np.ndarray, floor: float = BANDWIDTH_FLOOR) -> float:
    """Silverman's rule of thumb with a floor for degenerate samples.

    h = 0.9 * min(std, IQR / 1.34) * n**(-1/5), std with ddof=1 (taken as 0
    for a single observation), never below ``floor``.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("bandwidth needs a non-empty 1-d sample")
    n = arr.size
    std = float(arr.std(ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(arr, [75, 25])
    spread = min(std, float(q75 - q25) / 1.34)
    h = 0.9 * spread * n ** (-0.2)
    return max(h, floor)


@dataclass(frozen=True, eq=False)
class KdeCurve:
    """Density sampled on a uniform grid; total mass must be within 1%."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def __post_init__(self) -> None:
        if self.grid.shape != self.density.shape or self.grid.ndim != 1:
            raise ValueError("grid and density must be matching 1-d arrays")
        if self.grid.size < 2:
            raise ValueError("curve needs at least two grid nodes")
        integral = float(_trapezoid(self.density, self.grid))
        if abs(integral - 1.0) > _INTEGRAL_TOLERANCE:
            raise ValueError(f"density integrates to {integral:.4f}, expected 1 +/- 0.01")

    @property
    def integral(self) -> float:
        return float(_trapezoid(self.density, self.grid))


def utterance_changes_kde(
    values: Sequence[float] | np.ndarray, grid_points: int = 201
) -> KdeCurve:
    """Gaussian KDE of per-utterance change counts.

    The uniform grid spans [min - 3h, max + 3h]; ``grid_points`` is a
    minimum, densified until node spacing is at most h/2 so the trapezoid
    mass stays within tolerance.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("kde needs a non-empty 1-d sample")
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    h = silverman_bandwidth(arr)
    lo = float(arr.min()) - 3.0 * h
    hi = float(arr.max()) + 3.0 * h
    span = hi - lo
    npts = max(grid_points, int(math.ceil(span / (h * _MAX_NODE_SPACING_FRACTION))) + 1)
    grid = np.linspace(lo, hi, npts)
    norm = 1.0 / (arr.size * h * math.sqrt(2.0 * math.pi))
    density = np.empty_like(grid)
    for start in range(0, npts, 4096):
        block = grid[start : start + 4096]
        z = (block[:, None] - arr[None, :]) / h
        density[start : start + block.size] = norm * np.exp(-0.5 * z * z).sum(axis=1)
    return KdeCurve(grid=grid, density=density, bandwidth=h)
