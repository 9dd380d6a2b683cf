"""Configuration-phase calibration: per-finger 3-state clustering.

Each finger's flex stream from the configuration phase is clustered into
three classes; the lowest-mean class is the Straight state (digit 1), the
highest-mean class Full Bend (digit 3), the middle Half Bend (digit 2).
Decision boundaries are the midpoints between adjacent centroids.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .samples import ADC_MAX, FINGER_NAMES, N_FINGERS, RawSample

KMEANS_MAX_ITER = 100
MIN_TRACE_SPAN_MS = 5_000.0
MIN_CHANNEL_RANGE = 40.0  # counts a finger must sweep during configuration

ORIENTATION_THRESHOLD_G = 0.6  # |palm-normal accel| at/above this reads horizontal


class ClusterCollapse(ValueError):
    """Configuration data cannot support three states; re-run the phase."""

    def __init__(self, reason: str, finger: str | None = None):
        self.finger = finger
        prefix = f"{finger}: " if finger else ""
        super().__init__(prefix + reason)


class TraceTooShort(ValueError):
    """Configuration trace spans less than the required window."""


@dataclass(frozen=True)
class FingerCalibration:
    """Three ascending centroids and the midpoint boundaries between them."""

    centroids: tuple[float, float, float]

    def __post_init__(self):
        c1, c2, c3 = self.centroids
        if not c1 < c2 < c3:
            raise ValueError("centroids must be strictly ascending")
        if c1 < 0 or c3 > ADC_MAX:
            raise ValueError(f"centroids must lie in [0, {ADC_MAX}]")

    @property
    def boundaries(self) -> tuple[float, float]:
        c1, c2, c3 = self.centroids
        return ((c1 + c2) / 2.0, (c2 + c3) / 2.0)


@dataclass(frozen=True)
class GloveCalibration:
    """One FingerCalibration per finger, in thumb..little order."""

    fingers: tuple[FingerCalibration, ...]

    def __post_init__(self):
        if len(self.fingers) != N_FINGERS:
            raise ValueError("calibration needs exactly 5 fingers")


def kmeans3(values: Sequence[float]) -> tuple[float, float, float]:
    """Cluster a 1-D sample into 3 centroids, returned ascending.

    Lloyd's iterations with deterministic (min, median, max) initialization,
    so the result is reproducible and independent of input order. An empty
    cluster is repaired once by reseeding it to the point farthest from its
    current centroid; a second occurrence raises ClusterCollapse.
    """
    data = np.asarray(values, dtype=float)
    if data.ndim != 1:
        raise ValueError("kmeans3 expects a flat sequence")
    if np.unique(data).size < 3:
        raise ClusterCollapse("fewer than 3 distinct values")

    centroids = np.array([data.min(), np.median(data), data.max()])
    repaired = False
    assignments = None
    for _ in range(KMEANS_MAX_ITER):
        order = np.argsort(centroids, kind="stable")
        centroids = centroids[order]
        # Nearest-centroid assignment; exact midpoints go to the lower
        # cluster, matching the quantizer's tie-break.
        b12 = (centroids[0] + centroids[1]) / 2.0
        b23 = (centroids[1] + centroids[2]) / 2.0
        new_assignments = np.where(data <= b12, 0, np.where(data <= b23, 1, 2))

        counts = np.bincount(new_assignments, minlength=3)
        if (counts == 0).any():
            if repaired:
                raise ClusterCollapse("empty cluster after repair")
            repaired = True
            empty = int(np.flatnonzero(counts == 0)[0])
            dist = np.abs(data - centroids[new_assignments])
            centroids[empty] = data[int(np.argmax(dist))]
            assignments = None
            continue

        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        centroids = np.array([data[assignments == k].mean() for k in range(3)])

    c1, c2, c3 = np.sort(centroids)
    if not c1 < c2 < c3:
        raise ClusterCollapse("centroids did not separate")
    return float(c1), float(c2), float(c3)


def calibrate(config_trace: Sequence[RawSample]) -> GloveCalibration:
    """Run kmeans3 independently on each finger channel of a config trace.

    Raises TraceTooShort when the trace spans under 5 s, and ClusterCollapse
    tagged with the offending finger when a channel never developed three
    usable states (including a channel that barely moved at all).
    """
    samples = list(config_trace)
    if not samples or samples[-1].t_ms - samples[0].t_ms < MIN_TRACE_SPAN_MS:
        raise TraceTooShort("configuration trace must span at least 5 s")

    flex = np.array([s.flex for s in samples], dtype=float)
    return FlexQuantizer().fit(flex).calibration_


def quantize_flex(raw: float, cal: FingerCalibration) -> int:
    """Map an ADC count to state digit 1/2/3; boundary ties go low."""
    value = min(max(raw, 0), ADC_MAX)
    b12, b23 = cal.boundaries
    if value <= b12:
        return 1
    if value <= b23:
        return 2
    return 3


def quantize_orientation(accel: Sequence[float]) -> int:
    """Palm orientation bit: 1 when the palm-normal (z) axis carries gravity."""
    return 1 if abs(accel[2]) >= ORIENTATION_THRESHOLD_G else 0


def save_calibration(cal: GloveCalibration, path: str | Path) -> None:
    """One finger per line: `<name>:c1,c2,c3` at 2 decimals."""
    with open(path, "w", encoding="ascii") as fh:
        for name, finger in zip(FINGER_NAMES, cal.fingers):
            c1, c2, c3 = finger.centroids
            fh.write(f"{name}:{c1:.2f},{c2:.2f},{c3:.2f}\n")


def load_calibration(path: str | Path) -> GloveCalibration:
    by_name: dict[str, FingerCalibration] = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            name, _, rest = line.partition(":")
            values = [float(v) for v in rest.split(",")]
            if name not in FINGER_NAMES or len(values) != 3:
                raise ValueError(f"bad calibration line: {line!r}")
            by_name[name] = FingerCalibration(tuple(values))
    missing = [n for n in FINGER_NAMES if n not in by_name]
    if missing:
        raise ValueError(f"calibration file missing fingers: {', '.join(missing)}")
    return GloveCalibration(tuple(by_name[n] for n in FINGER_NAMES))


class FlexQuantizer(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper over the per-finger state clustering.

    fit() takes an (n_samples, 5) array of raw flex counts from the
    configuration phase and learns the three-state model per column;
    transform() maps raw counts to state digits in {1, 2, 3}.
    """

    def __init__(self, min_channel_range: float = MIN_CHANNEL_RANGE):
        self.min_channel_range = min_channel_range

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != N_FINGERS:
            raise ValueError(f"expected {N_FINGERS} flex columns, got {X.shape[1]}")
        fingers = []
        for i, name in enumerate(FINGER_NAMES):
            channel = X[:, i]
            if channel.max() - channel.min() < self.min_channel_range:
                raise ClusterCollapse("finger barely moved during configuration", finger=name)
            try:
                fingers.append(FingerCalibration(kmeans3(channel)))
            except ClusterCollapse as exc:
                raise ClusterCollapse(str(exc), finger=name) from exc
        self.calibration_ = GloveCalibration(tuple(fingers))
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "calibration_")
        X = check_array(X, dtype=float)
        if X.shape[1] != N_FINGERS:
            raise ValueError(f"expected {N_FINGERS} flex columns, got {X.shape[1]}")
        digits = np.empty_like(X, dtype=int)
        for i, finger in enumerate(self.calibration_.fingers):
            b12, b23 = finger.boundaries
            col = np.clip(X[:, i], 0, ADC_MAX)
            digits[:, i] = np.where(col <= b12, 1, np.where(col <= b23, 2, 3))
        return digits

    @classmethod
    def from_calibration(cls, cal: GloveCalibration) -> "FlexQuantizer":
        quantizer = cls()
        quantizer.calibration_ = cal
        return quantizer
