"""Parametric gesture scripts.

Static letter holds, inter-gesture shakes, and the six word-motion
templates (hello, sorry, thankyou, goodbye, J, Z). Templates are built
from a few numbers (amplitudes, frequencies, segment lengths) so corpus
synthesis can jitter them per trace; passing rng=None yields the fixed
nominal variant used for preset export.

Every motion template starts and ends at the open rest palm, whose code
(111110) maps to no letter, so a word gesture cannot leave a spurious
alphabet emission behind once the hand stops moving.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .codemap import ALPHABET_CODES
from .simulator import (
    GYRO_STILL,
    GestureScript,
    GyroProfile,
    Keyframe,
    Orientation,
    chain_scripts,
)

Bends = tuple[float, float, float, float, float]

REST_BENDS: Bends = (0.0, 0.0, 0.0, 0.0, 0.0)
FIST_BENDS: Bends = (1.0, 1.0, 1.0, 1.0, 1.0)

# Finger-state digit -> bend fraction (1 straight, 2 half, 3 full).
DIGIT_BEND = {"1": 0.0, "2": 0.5, "3": 1.0}

WORD_LABELS = ("hello", "sorry", "thankyou", "goodbye", "J", "Z")
NONE_LABEL = "none"

_AXIS_STILL = (0.0, 0.0, 0.0)


class UnknownGesture(KeyError):
    """Requested letter or motion template does not exist."""


def bends_for_code(code: str) -> tuple[Bends, Orientation]:
    """Bend fractions and palm orientation realizing a gesture code."""
    bends = tuple(DIGIT_BEND[d] for d in code[:5])
    orientation: Orientation = "horizontal" if code[5] == "1" else "vertical"
    return bends, orientation


def _draw(rng: np.random.Generator | None, lo: float, hi: float) -> float:
    """Uniform draw, or the midpoint when building the nominal variant."""
    if rng is None:
        return (lo + hi) / 2.0
    return float(rng.uniform(lo, hi))


def _phase(rng: np.random.Generator | None) -> float:
    return 0.0 if rng is None else float(rng.uniform(0.0, 2.0 * math.pi))


def _pinned_hold(
    bends: Bends,
    duration_ms: float,
    orientation: Orientation = "vertical",
    gyro: GyroProfile = GYRO_STILL,
) -> GestureScript:
    # Two keyframes pin the pose for the whole duration; a single keyframe
    # would lerp toward whatever script gets chained on afterwards.
    keyframes = (
        Keyframe(0.0, bends, orientation, gyro),
        Keyframe(duration_ms, bends, orientation, gyro),
    )
    return GestureScript(keyframes, duration_ms)


def rest_script(duration_ms: float = 1000.0) -> GestureScript:
    return _pinned_hold(REST_BENDS, duration_ms)


def alphabet_hold_script(letter: str, hold_ms: float = 2000.0) -> GestureScript:
    """Static hold of one of the 24 alphabet gestures."""
    code = ALPHABET_CODES.get(letter.upper())
    if code is None:
        raise UnknownGesture(f"no static gesture for {letter!r}")
    bends, orientation = bends_for_code(code)
    return _pinned_hold(bends, hold_ms, orientation)


def _shake_profile(rng: np.random.Generator | None) -> GyroProfile:
    # All three axes active: distinguishes a shake from every word
    # template, which are one- or two-axis motions.
    return tuple(
        (_draw(rng, 110.0, 200.0), _draw(rng, 2.3, 3.2), _phase(rng))
        for _ in range(3)
    )


def shake_script(
    duration_ms: float = 1000.0, rng: np.random.Generator | None = None
) -> GestureScript:
    """Open-palm three-axis wrist shake, used between spelled letters."""
    return _pinned_hold(REST_BENDS, duration_ms, "vertical", _shake_profile(rng))


def _bracketed(
    rng: np.random.Generator | None,
    body: list[Keyframe],
    body_ms: float,
) -> GestureScript:
    """Wrap motion keyframes in lead/tail rests at the open palm."""
    lead = _draw(rng, 300.0, 600.0)
    tail = _draw(rng, 300.0, 600.0)
    keyframes = [Keyframe(0.0, REST_BENDS)]
    keyframes.extend(
        Keyframe(kf.t_ms + lead, kf.bends, kf.orientation, kf.gyro) for kf in body
    )
    end = lead + body_ms
    keyframes.append(Keyframe(end + tail, REST_BENDS))
    return GestureScript(tuple(keyframes), end + tail)


def _hello(rng: np.random.Generator | None) -> GestureScript:
    # Flat-hand salute wave: a single strong z-axis oscillation, fingers
    # never leave the open pose.
    motion = _draw(rng, 2200.0, 2600.0)
    wave: GyroProfile = (
        _AXIS_STILL,
        _AXIS_STILL,
        (_draw(rng, 119.0, 161.0), _draw(rng, 1.71, 2.09), _phase(rng)),
    )
    body = [Keyframe(0.0, REST_BENDS, "vertical", wave), Keyframe(motion, REST_BENDS)]
    return _bracketed(rng, body, motion)


def _sorry(rng: np.random.Generator | None) -> GestureScript:
    # Fist circling on the chest: x/y gyro a quarter-cycle apart.
    entry = _draw(rng, 220.0, 280.0)
    motion = _draw(rng, 2000.0, 2400.0)
    exit_ = _draw(rng, 220.0, 280.0)
    amp = _draw(rng, 72.0, 98.0)
    freq = _draw(rng, 1.08, 1.32)
    phase = _phase(rng)
    circle: GyroProfile = (
        (amp, freq, phase),
        (amp, freq, phase + math.pi / 2.0),
        _AXIS_STILL,
    )
    body = [
        Keyframe(0.0, REST_BENDS),
        Keyframe(entry, FIST_BENDS, "vertical", circle),
        Keyframe(entry + motion, FIST_BENDS),
        Keyframe(entry + motion + exit_, REST_BENDS),
    ]
    return _bracketed(rng, body, entry + motion + exit_)


def _thankyou(rng: np.random.Generator | None) -> GestureScript:
    # Flat hand tipping from the chin outward: palm flips to horizontal
    # for the duration, single y-axis sweep.
    motion = _draw(rng, 2100.0, 2500.0)
    sweep: GyroProfile = (
        _AXIS_STILL,
        (_draw(rng, 89.0, 121.0), _draw(rng, 0.72, 0.88), _phase(rng)),
        _AXIS_STILL,
    )
    body = [
        Keyframe(0.0, REST_BENDS, "horizontal", sweep),
        Keyframe(motion, REST_BENDS),
    ]
    return _bracketed(rng, body, motion)


def _goodbye(rng: np.random.Generator | None) -> GestureScript:
    # Wave goodbye: four fingers curl and release repeatedly while the
    # thumb stays put; mild x-axis rock keeps the wrist honest.
    half_period = _draw(rng, 320.0, 380.0)
    n_legs = 6 if rng is None else int(rng.integers(5, 8))
    wobble: GyroProfile = (
        (_draw(rng, 51.0, 69.0), _draw(rng, 1.08, 1.32), _phase(rng)),
        _AXIS_STILL,
        _AXIS_STILL,
    )
    closed: Bends = (0.0, 1.0, 1.0, 1.0, 1.0)
    body = [Keyframe(0.0, REST_BENDS, "vertical", wobble)]
    for leg in range(1, n_legs + 1):
        bends = closed if leg % 2 == 1 else REST_BENDS
        body.append(Keyframe(leg * half_period, bends, "vertical", wobble))
    if body[-1].bends != REST_BENDS:
        n_legs += 1
        body.append(Keyframe(n_legs * half_period, REST_BENDS, "vertical", wobble))
    motion = n_legs * half_period
    # Same-time keyframe steps the gyro off before the tail rest.
    body.append(Keyframe(motion, REST_BENDS))
    return _bracketed(rng, body, motion)


def _letter_j(rng: np.random.Generator | None) -> GestureScript:
    # Pinky-out I handshape drawing a J: one slow z-then-x stroke.
    entry = _draw(rng, 220.0, 280.0)
    motion = _draw(rng, 2000.0, 2400.0)
    exit_ = _draw(rng, 220.0, 280.0)
    freq = _draw(rng, 0.63, 0.77)
    phase = _phase(rng)
    stroke: GyroProfile = (
        (_draw(rng, 77.0, 103.0), freq, phase + math.pi / 2.0),
        _AXIS_STILL,
        (_draw(rng, 111.0, 149.0), freq, phase),
    )
    shape: Bends = (1.0, 1.0, 1.0, 1.0, 0.0)
    body = [
        Keyframe(0.0, REST_BENDS),
        Keyframe(entry, shape, "vertical", stroke),
        Keyframe(entry + motion, shape),
        Keyframe(entry + motion + exit_, REST_BENDS),
    ]
    return _bracketed(rng, body, entry + motion + exit_)


def _letter_z(rng: np.random.Generator | None) -> GestureScript:
    # Index finger slashing a Z: fast sharp z-axis zigzag.
    entry = _draw(rng, 220.0, 280.0)
    motion = _draw(rng, 2100.0, 2500.0)
    exit_ = _draw(rng, 220.0, 280.0)
    zigzag: GyroProfile = (
        _AXIS_STILL,
        _AXIS_STILL,
        (_draw(rng, 162.0, 218.0), _draw(rng, 2.34, 2.86), _phase(rng)),
    )
    shape: Bends = (1.0, 0.0, 1.0, 1.0, 1.0)
    body = [
        Keyframe(0.0, REST_BENDS),
        Keyframe(entry, shape, "vertical", zigzag),
        Keyframe(entry + motion, shape),
        Keyframe(entry + motion + exit_, REST_BENDS),
    ]
    return _bracketed(rng, body, entry + motion + exit_)


_WORD_BUILDERS = {
    "hello": _hello,
    "sorry": _sorry,
    "thankyou": _thankyou,
    "goodbye": _goodbye,
    "J": _letter_j,
    "Z": _letter_z,
}


def word_script(
    label: str, rng: np.random.Generator | None = None
) -> GestureScript:
    """One randomized performance of a word gesture (rest to rest)."""
    builder = _WORD_BUILDERS.get(label)
    if builder is None:
        raise UnknownGesture(f"no motion template for {label!r}")
    return builder(rng)


def _random_letter(rng: np.random.Generator) -> str:
    letters = sorted(ALPHABET_CODES)
    return letters[int(rng.integers(0, len(letters)))]


def none_script(rng: np.random.Generator) -> GestureScript:
    """A motion or hold that should classify as no word.

    Draws from the negatives the recognizer actually meets: bracketed
    three-axis shakes, the hold-shake-hold transition of finger spelling,
    and static holds of the open palm or a random letter.
    """
    kind = rng.integers(0, 5)
    if kind <= 1:
        motion = _draw(rng, 1800.0, 2600.0)
        body = [
            Keyframe(0.0, REST_BENDS, "vertical", _shake_profile(rng)),
            Keyframe(motion, REST_BENDS),
        ]
        return _bracketed(rng, body, motion)
    if kind == 2:
        # Hold lengths past one full window so "quiet hold, release step,
        # first shake frame" edge windows land in the none class.
        return spell_script(
            [_random_letter(rng), _random_letter(rng)],
            hold_ms=_draw(rng, 1200.0, 2600.0),
            shake_ms=_draw(rng, 800.0, 1200.0),
            rng=rng,
        )
    if kind == 3:
        return rest_script(_draw(rng, 2800.0, 3600.0))
    return alphabet_hold_script(_random_letter(rng), _draw(rng, 2800.0, 3600.0))


def spell_script(
    letters: Sequence[str],
    hold_ms: float = 2000.0,
    shake_ms: float = 1000.0,
    rng: np.random.Generator | None = None,
) -> GestureScript:
    """Finger-spell letters with a wrist shake between repetitions."""
    if not letters:
        raise UnknownGesture("nothing to spell")
    parts: list[GestureScript] = []
    for i, letter in enumerate(letters):
        if i:
            parts.append(shake_script(shake_ms, rng))
        parts.append(alphabet_hold_script(letter, hold_ms))
    return chain_scripts(parts)


MOTION_PRESETS = WORD_LABELS + ("shake",)


def nominal_preset(name: str) -> GestureScript:
    """Deterministic template variant shared with UI presets."""
    if name == "shake":
        return shake_script(1000.0, None)
    return word_script(name, None)


def export_presets(rate_hz: float = 20.0) -> dict:
    """JSON-ready document describing every motion preset.

    Consumers replay a preset by interpolating bends linearly between
    keyframes and stepping orientation/gyro at each keyframe, with each
    gyro axis following amp*sin(2*pi*freq*t + phase) for absolute trace
    time t in seconds — the same rendering rule the simulator applies.
    """
    presets = {}
    for name in MOTION_PRESETS:
        script = nominal_preset(name)
        presets[name] = {
            "duration_ms": script.duration_ms,
            "keyframes": [
                {
                    "t_ms": kf.t_ms,
                    "bends": list(kf.bends),
                    "orientation": kf.orientation,
                    "gyro": [list(axis) for axis in kf.gyro],
                }
                for kf in script.keyframes
            ],
        }
    return {"version": 1, "rate_hz": rate_hz, "presets": presets}
