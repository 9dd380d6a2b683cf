"""First-order-derivative motion features over frame windows.

Each window reduces to 11 numbers: the mean absolute first difference of
the 5 flex-digit channels, 3 accel channels and 3 gyro channels. The mean
makes the feature invariant to window length, so 2 s training buffers and
1.5 s inference windows share one feature space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import EncodedFrame

N_FEATURES = 11
FEATURE_NAMES = (
    "d_thumb", "d_index", "d_middle", "d_ring", "d_little",
    "d_ax", "d_ay", "d_az",
    "d_gx", "d_gy", "d_gz",
)


class TooFewFrames(ValueError):
    """Not enough frames for a difference row or a full window."""


@dataclass(frozen=True)
class WindowSpec:
    """Window geometry in milliseconds, converted to frames at 50 ms/frame."""

    sample_len_ms: int = 2000  # training buffer length
    infer_window_ms: int = 1500
    frameshift_ms: int = 750
    frame_period_ms: int = 50

    def __post_init__(self):
        if min(self.sample_len_ms, self.infer_window_ms, self.frameshift_ms) <= 0:
            raise ValueError("window lengths must be positive")
        if self.frameshift_ms > self.infer_window_ms:
            raise ValueError("frameshift must not exceed the inference window")
        if self.frame_period_ms <= 0:
            raise ValueError("frame period must be positive")

    @property
    def sample_frames(self) -> int:
        return round(self.sample_len_ms / self.frame_period_ms)

    @property
    def window_frames(self) -> int:
        return round(self.infer_window_ms / self.frame_period_ms)

    @property
    def shift_frames(self) -> int:
        return round(self.frameshift_ms / self.frame_period_ms)


def motion_channels(frames: Sequence[EncodedFrame]) -> np.ndarray:
    """(n, 11) matrix of the motion channels; the orientation bit is omitted."""
    return np.array(
        [list(f.digits) + list(f.accel) + list(f.gyro) for f in frames], dtype=float
    )


def first_difference(frames: Sequence[EncodedFrame]) -> np.ndarray:
    """Successive per-channel differences; (n-1, 11) for n input frames."""
    if len(frames) < 2:
        raise TooFewFrames("need at least 2 frames to differentiate")
    channels = motion_channels(frames)
    return channels[1:] - channels[:-1]


def extract_features(frames: Sequence[EncodedFrame]) -> np.ndarray:
    """Mean absolute first difference per channel over the window."""
    return np.abs(first_difference(frames)).mean(axis=0)


def sliding_windows(
    frames: Sequence[EncodedFrame],
    spec: WindowSpec,
    *,
    window_frames: int | None = None,
    shift_frames: int | None = None,
) -> list[Sequence[EncodedFrame]]:
    """Slice frames into inference windows; the final partial window is dropped.

    window_frames/shift_frames override the spec's inference geometry (the
    training path uses sample-length windows through the same slicer).
    """
    w = window_frames if window_frames is not None else spec.window_frames
    s = shift_frames if shift_frames is not None else spec.shift_frames
    if len(frames) < w:
        raise TooFewFrames(f"need at least {w} frames, got {len(frames)}")
    count = (len(frames) - w) // s + 1
    return [frames[i * s : i * s + w] for i in range(count)]
