"""Software stand-in for the physical glove.

Turns parametric gesture scripts into timed raw sensor traces with Gaussian
channel noise and optional flex drift, so the rest of the pipeline can be
exercised without hardware.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .samples import (
    ACCEL_RANGE_G,
    ADC_MAX,
    GYRO_RANGE_DPS,
    N_FINGERS,
    RawSample,
)

Orientation = Literal["vertical", "horizontal"]

# One (amplitude_dps, frequency_hz, phase_rad) sinusoid per gyro axis.
GyroProfile = tuple[
    tuple[float, float, float],
    tuple[float, float, float],
    tuple[float, float, float],
]

GYRO_STILL: GyroProfile = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

# Gravity direction for the two palm poses; z is the palm-normal axis.
_ACCEL_BASE = {"vertical": (0.0, -1.0, 0.0), "horizontal": (0.0, 0.0, -1.0)}


class InvalidScript(ValueError):
    """Gesture script is empty or has a non-positive duration."""


@dataclass(frozen=True)
class SensorProfile:
    """ADC mapping and noise model for one simulated glove.

    The voltage divider electronics are abstracted into a linear mapping
    from bend fraction to ADC counts between straight_adc and fullbend_adc
    (the full-bend resistance being a few times the straight one). Drift
    multiplies the bend-dependent term and grows with simulated wear.
    """

    straight_adc: tuple[float, ...] = (180.0, 170.0, 175.0, 185.0, 190.0)
    fullbend_adc: tuple[float, ...] = (780.0, 760.0, 770.0, 800.0, 810.0)
    noise_sigma_adc: float = 15.0
    drift_rate: float = 0.0  # multiplicative, per simulated hour of wear
    accel_sigma_g: float = 0.02
    gyro_sigma_dps: float = 1.5
    age_hours: float = 0.0  # wear accumulated before the trace starts
    seed: int = 0

    def validate(self) -> None:
        if len(self.straight_adc) != N_FINGERS or len(self.fullbend_adc) != N_FINGERS:
            raise ValueError("profiles need 5 straight and 5 fullbend ADC levels")
        for lo, hi in zip(self.straight_adc, self.fullbend_adc):
            if not (0 <= lo < hi <= ADC_MAX):
                raise ValueError(f"need 0 <= straight ({lo}) < fullbend ({hi}) <= {ADC_MAX}")
        if self.noise_sigma_adc < 0 or self.drift_rate < 0:
            raise ValueError("noise sigma and drift rate must be >= 0")
        if self.accel_sigma_g < 0 or self.gyro_sigma_dps < 0:
            raise ValueError("IMU noise sigmas must be >= 0")
        if self.age_hours < 0:
            raise ValueError("age_hours must be >= 0")

    def with_seed(self, seed: int) -> "SensorProfile":
        return replace(self, seed=seed)

    def aged(self, hours: float) -> "SensorProfile":
        return replace(self, age_hours=self.age_hours + hours)


@dataclass(frozen=True)
class Keyframe:
    t_ms: float
    bends: tuple[float, float, float, float, float]
    orientation: Orientation = "vertical"
    gyro: GyroProfile = GYRO_STILL


@dataclass(frozen=True)
class GestureScript:
    """Ordered keyframes over a fixed duration.

    Bend fractions interpolate linearly between keyframes; orientation and
    the gyro sinusoid parameters step at each keyframe. Two keyframes with
    equal times make an instantaneous step.
    """

    keyframes: tuple[Keyframe, ...]
    duration_ms: float

    def validate(self) -> None:
        if not self.keyframes:
            raise InvalidScript("script has no keyframes")
        if self.duration_ms <= 0:
            raise InvalidScript("script duration must be positive")
        prev = None
        for kf in self.keyframes:
            if len(kf.bends) != N_FINGERS:
                raise InvalidScript("keyframe needs 5 bend fractions")
            if any(not 0.0 <= b <= 1.0 for b in kf.bends):
                raise InvalidScript("bend fractions must lie in [0, 1]")
            if prev is not None and kf.t_ms < prev:
                raise InvalidScript("keyframe times must be non-decreasing")
            prev = kf.t_ms

    def shifted(self, offset_ms: float) -> "GestureScript":
        moved = tuple(replace(kf, t_ms=kf.t_ms + offset_ms) for kf in self.keyframes)
        return GestureScript(moved, self.duration_ms)


def chain_scripts(scripts: Sequence[GestureScript]) -> GestureScript:
    """Concatenate scripts back to back."""
    if not scripts:
        raise InvalidScript("nothing to chain")
    keyframes: list[Keyframe] = []
    offset = 0.0
    for script in scripts:
        keyframes.extend(script.shifted(offset).keyframes)
        offset += script.duration_ms
    return GestureScript(tuple(keyframes), offset)


def _sample_count(duration_ms: float, rate_hz: float) -> int:
    return math.ceil(duration_ms * rate_hz / 1000.0 - 1e-9)


def synthesize(
    script: GestureScript, profile: SensorProfile, rate_hz: float = 20.0
) -> list[RawSample]:
    """Render a script into a timed raw trace.

    Deterministic for a given (script, profile, rate): all noise comes from
    a generator seeded with profile.seed. Every output sample respects the
    RawSample range invariants via clamping.
    """
    script.validate()
    profile.validate()
    if not 0 < rate_hz <= 1000:
        raise ValueError("rate_hz must be in (0, 1000]")

    n = _sample_count(script.duration_ms, rate_hz)
    rng = np.random.default_rng(profile.seed)

    t_ms = np.array([int(i * 1000.0 / rate_hz) for i in range(n)], dtype=np.int64)
    t_s = t_ms / 1000.0

    kf_times = np.array([kf.t_ms for kf in script.keyframes])
    kf_bends = np.array([kf.bends for kf in script.keyframes])
    m = len(script.keyframes)

    # Segment index per sample; side="right" makes duplicate-time keyframes
    # behave as steps.
    idx = np.clip(np.searchsorted(kf_times, t_ms, side="right") - 1, 0, m - 1)
    nxt = np.minimum(idx + 1, m - 1)
    span = kf_times[nxt] - kf_times[idx]
    frac = np.where(span > 0, (t_ms - kf_times[idx]) / np.where(span > 0, span, 1.0), 0.0)
    frac = np.clip(frac, 0.0, 1.0)
    bends = kf_bends[idx] + frac[:, None] * (kf_bends[nxt] - kf_bends[idx])

    straight = np.array(profile.straight_adc)
    fullbend = np.array(profile.fullbend_adc)
    drift_mult = 1.0 + profile.drift_rate * (profile.age_hours + t_ms / 3_600_000.0)
    flex_true = straight + bends * (fullbend - straight) * drift_mult[:, None]
    flex_noise = rng.normal(0.0, profile.noise_sigma_adc, size=(n, N_FINGERS))
    flex = np.clip(np.rint(flex_true + flex_noise), 0, ADC_MAX).astype(int)

    accel_base = np.array([_ACCEL_BASE[script.keyframes[j].orientation] for j in idx])
    accel = accel_base + rng.normal(0.0, profile.accel_sigma_g, size=(n, 3))
    accel = np.clip(accel, -ACCEL_RANGE_G, ACCEL_RANGE_G)

    gyro_params = np.array([script.keyframes[j].gyro for j in idx])  # (n, 3, 3)
    amp, freq, phase = gyro_params[:, :, 0], gyro_params[:, :, 1], gyro_params[:, :, 2]
    gyro = amp * np.sin(2.0 * math.pi * freq * t_s[:, None] + phase)
    gyro = gyro + rng.normal(0.0, profile.gyro_sigma_dps, size=(n, 3))
    gyro = np.clip(gyro, -GYRO_RANGE_DPS, GYRO_RANGE_DPS)

    return [
        RawSample(
            t_ms=int(t_ms[i]),
            flex=tuple(int(v) for v in flex[i]),
            accel=tuple(float(v) for v in accel[i]),
            gyro=tuple(float(v) for v in gyro[i]),
        )
        for i in range(n)
    ]


def profile_to_text(profile: SensorProfile) -> str:
    """key=value document for a SensorProfile (lists comma-joined)."""
    profile.validate()
    lines = [
        "straight_adc=" + ",".join(f"{v:g}" for v in profile.straight_adc),
        "fullbend_adc=" + ",".join(f"{v:g}" for v in profile.fullbend_adc),
        f"noise_sigma_adc={profile.noise_sigma_adc:g}",
        f"drift_rate={profile.drift_rate:g}",
        f"accel_sigma_g={profile.accel_sigma_g:g}",
        f"gyro_sigma_dps={profile.gyro_sigma_dps:g}",
        f"age_hours={profile.age_hours:g}",
        f"seed={profile.seed}",
    ]
    return "\n".join(lines) + "\n"


def profile_from_text(text: str) -> SensorProfile:
    fields: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"profile line {lineno}: expected key=value")
        key = key.strip()
        value = value.strip()
        if key in ("straight_adc", "fullbend_adc"):
            fields[key] = tuple(float(v) for v in value.split(","))
        elif key == "seed":
            fields[key] = int(value)
        elif key in (
            "noise_sigma_adc",
            "drift_rate",
            "accel_sigma_g",
            "gyro_sigma_dps",
            "age_hours",
        ):
            fields[key] = float(value)
        else:
            raise ValueError(f"profile line {lineno}: unknown key {key!r}")
    profile = SensorProfile(**fields)
    profile.validate()
    return profile


def save_profile(profile: SensorProfile, path: str | Path) -> None:
    Path(path).write_text(profile_to_text(profile), encoding="ascii")


def load_profile(path: str | Path) -> SensorProfile:
    return profile_from_text(Path(path).read_text(encoding="ascii"))


def config_phase_script(
    profile: SensorProfile, *, wobble: bool = True
) -> GestureScript:
    """Build the ~10 s configuration-phase exercise.

    Each finger independently visits bend levels near 0, 0.5 and 1.0 three
    times in shuffled order (open hand, half curls, closed fists), so the
    per-finger clustering sees all three states with plenty of dwell time.
    """
    rng = np.random.default_rng(profile.seed)
    levels = [0.0, 0.5, 1.0]
    reps = 3
    n_segments = len(levels) * reps

    duration = float(rng.integers(9_400, 10_600))
    seg = duration / n_segments

    finger_levels = []
    for _ in range(N_FINGERS):
        seq = levels * reps
        rng.shuffle(seq)
        finger_levels.append(seq)

    def wobble_profile() -> GyroProfile:
        if not wobble:
            return GYRO_STILL
        return tuple(
            (float(rng.uniform(2.0, 8.0)), float(rng.uniform(0.3, 1.2)), float(rng.uniform(0, 2 * math.pi)))
            for _ in range(3)
        )

    # Step transitions (paired same-bend keyframes) keep every sample on a
    # true level, so clustering sees clean point masses.
    keyframes: list[Keyframe] = []
    for j in range(n_segments):
        bends = tuple(finger_levels[i][j] for i in range(N_FINGERS))
        gyro = wobble_profile()
        keyframes.append(Keyframe(j * seg, bends, "vertical", gyro))
        keyframes.append(Keyframe((j + 1) * seg, bends, "vertical", gyro))
    keyframes.append(Keyframe(duration, keyframes[-1].bends, "vertical", GYRO_STILL))

    return GestureScript(tuple(keyframes), duration)
