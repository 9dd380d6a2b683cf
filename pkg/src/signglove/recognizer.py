"""Host-side stream recognizer.

Maintains the 30-frame ring buffer, computes per-channel mean/variance,
routes each full window to the alphabet, word, or idle path, resolves
alphabet codes through the code map, and deduplicates repeats of a held
gesture. Word segments are delegated to a pluggable classifier callback
so the recognizer stays independent of any particular model.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .codemap import build_code_map
from .encoding import EncodedFrame, Emission, gesture_code

logger = logging.getLogger(__name__)

BUFFER_LEN = 30  # ring capacity in frames (1.5 s at 20 Hz)
N_CHANNELS = 12  # 5 digits + orientation + 3 accel + 3 gyro

DIGIT_CHANNELS = slice(0, 5)
ORIENT_CHANNEL = 5
ACCEL_CHANNELS = slice(6, 9)
GYRO_CHANNELS = slice(9, 12)


class BufferNotFull(ValueError):
    """Statistics require exactly BUFFER_LEN frames."""


class Route(Enum):
    ALPHABET = "alphabet"
    WORD = "word"
    IDLE = "idle"


@dataclass(frozen=True)
class RecognizerParams:
    gyro_var_threshold: float = 400.0  # dps^2; at/above routes to Word
    digit_var_threshold: float = 0.25
    mode_majority_fraction: float = 0.8
    rearm_var_threshold: float = 400.0  # dps^2; above re-arms dedup

    def __post_init__(self):
        if self.gyro_var_threshold <= 0 or self.rearm_var_threshold <= 0:
            raise ValueError("variance thresholds must be > 0")
        if self.digit_var_threshold <= 0:
            raise ValueError("digit_var_threshold must be > 0")
        if not 0.5 < self.mode_majority_fraction <= 1.0:
            raise ValueError("mode_majority_fraction must be in (0.5, 1]")


@dataclass(frozen=True, eq=False)
class BufferStats:
    mean: np.ndarray  # shape (12,)
    variance: np.ndarray  # shape (12,), population variance


def frame_channels(frame: EncodedFrame) -> tuple[float, ...]:
    """Frame as the 12-channel row used for buffer statistics."""
    return tuple(float(d) for d in frame.digits) + (
        float(frame.orient),
        *frame.accel,
        *frame.gyro,
    )


def buffer_stats(buffer: Sequence[EncodedFrame]) -> BufferStats:
    if len(buffer) != BUFFER_LEN:
        raise BufferNotFull(f"need {BUFFER_LEN} frames, have {len(buffer)}")
    rows = np.array([frame_channels(f) for f in buffer], dtype=float)
    return BufferStats(mean=rows.mean(axis=0), variance=rows.var(axis=0))


def mode_code(buffer: Sequence[EncodedFrame]) -> tuple[str, float]:
    """Most frequent gesture code and its support fraction.

    Ties go to the code seen most recently, favoring whatever the hand is
    settling into.
    """
    if len(buffer) != BUFFER_LEN:
        raise BufferNotFull(f"need {BUFFER_LEN} frames, have {len(buffer)}")
    counts: dict[str, int] = {}
    last_seen: dict[str, int] = {}
    for i, frame in enumerate(buffer):
        code = gesture_code(frame)
        counts[code] = counts.get(code, 0) + 1
        last_seen[code] = i
    best = max(counts, key=lambda c: (counts[c], last_seen[c]))
    return best, counts[best] / len(buffer)


def discriminate(
    stats: BufferStats,
    mode_support: float,
    params: RecognizerParams = RecognizerParams(),
) -> Route:
    """Route a full window: Word on high gyro variance, Alphabet on a
    stable majority code with quiet digit channels, Idle otherwise."""
    if float(stats.variance[GYRO_CHANNELS].max()) >= params.gyro_var_threshold:
        return Route.WORD
    digits_quiet = bool(
        (stats.variance[DIGIT_CHANNELS] <= params.digit_var_threshold).all()
    )
    if digits_quiet and mode_support >= params.mode_majority_fraction:
        return Route.ALPHABET
    return Route.IDLE


# A word classifier maps a motion segment (>= 2 frames) to a label or None.
WordClassifier = Callable[[Sequence[EncodedFrame]], Optional[str]]


class PassthroughCorrector:
    """Stream-handling hook after dedup; currently the identity.

    Exists so a language-model or spelling corrector can be slotted in
    without touching the recognizer loop.
    """

    def correct(self, emissions: list[Emission]) -> list[Emission]:
        return emissions


class StreamRecognizer:
    """Sequential frame consumer producing deduplicated emissions.

    Single-owner and single-threaded: push() must be called from one
    thread in arrival order.
    """

    def __init__(
        self,
        code_map: dict[str, str] | None = None,
        params: RecognizerParams = RecognizerParams(),
        word_classifier: WordClassifier | None = None,
        corrector: PassthroughCorrector | None = None,
    ):
        self.code_map = build_code_map() if code_map is None else dict(code_map)
        self.params = params
        self.word_classifier = word_classifier
        self.corrector = corrector or PassthroughCorrector()
        self.buffer: deque[EncodedFrame] = deque(maxlen=BUFFER_LEN)
        self.last_emitted: tuple[str, int] | None = None
        # Armed at start so the first settled gesture emits.
        self.motion_armed = True
        self._prev_mode: str | None = None
        self._segment: list[EncodedFrame] | None = None
        self._skipped_segments = 0

    def push(self, frame: EncodedFrame) -> list[Emission]:
        """Append one frame; returns zero or more emissions."""
        self.buffer.append(frame)
        if len(self.buffer) < BUFFER_LEN:
            return []

        stats = buffer_stats(self.buffer)
        code, support = mode_code(self.buffer)
        route = discriminate(stats, support, self.params)

        if float(stats.variance[GYRO_CHANNELS].max()) > self.params.rearm_var_threshold:
            self.motion_armed = True
        if self._prev_mode is not None and code != self._prev_mode:
            self.motion_armed = True
        self._prev_mode = code

        emissions: list[Emission] = []

        if route is Route.WORD:
            if self._segment is None:
                self._segment = list(self.buffer)
            else:
                self._segment.append(frame)
        elif self._segment is not None:
            emissions.extend(self._close_segment())

        if route is Route.ALPHABET and self.motion_armed:
            letter = self.code_map.get(code)
            if letter is not None:
                emissions.append(Emission("alphabet", letter, frame.seq))
                self.last_emitted = (letter, frame.seq)
                self.motion_armed = False
            # Unmatched codes discard the window without emitting.

        return self.corrector.correct(emissions)

    def flush(self) -> list[Emission]:
        """Close any open word segment at end of input."""
        if self._segment is None:
            return []
        return self.corrector.correct(self._close_segment())

    def _close_segment(self) -> list[Emission]:
        segment = self._segment
        self._segment = None
        if segment is None:
            return []
        # Stamp the segment's own final frame so a same-frame alphabet
        # decision keeps emission sequence numbers strictly increasing.
        at_seq = segment[-1].seq
        if self.word_classifier is None:
            self._skipped_segments += 1
            if self._skipped_segments == 1:
                logger.warning(
                    "word motion detected but no word model loaded; "
                    "segments will be skipped"
                )
            return []
        label = self.word_classifier(segment)
        if label is None or label == "none":
            return []
        return [Emission("word", label, at_seq)]


def push_frame(state: StreamRecognizer, frame: EncodedFrame) -> list[Emission]:
    """Functional alias for StreamRecognizer.push."""
    return state.push(frame)
