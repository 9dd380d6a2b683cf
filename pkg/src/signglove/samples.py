"""Raw sensor sample type and the ASCII trace file format."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

logger = logging.getLogger(__name__)

ADC_MIN = 0
ADC_MAX = 1023  # 10-bit converter, inclusive
ACCEL_RANGE_G = 2.0
GYRO_RANGE_DPS = 500.0

FINGER_NAMES = ("thumb", "index", "middle", "ring", "little")
N_FINGERS = 5


@dataclass(frozen=True)
class RawSample:
    """One 20 Hz glove reading: 5 flex ADC counts plus 6-axis IMU."""

    t_ms: int
    flex: tuple[int, int, int, int, int]
    accel: tuple[float, float, float]  # g
    gyro: tuple[float, float, float]  # deg/s

    def validate(self) -> None:
        if len(self.flex) != N_FINGERS:
            raise ValueError("expected 5 flex channels")
        for v in self.flex:
            if not ADC_MIN <= v <= ADC_MAX:
                raise ValueError(f"flex value {v} outside [{ADC_MIN}, {ADC_MAX}]")
        for a in self.accel:
            if not -ACCEL_RANGE_G <= a <= ACCEL_RANGE_G:
                raise ValueError(f"accel value {a} outside +/-{ACCEL_RANGE_G} g")
        for g in self.gyro:
            if not -GYRO_RANGE_DPS <= g <= GYRO_RANGE_DPS:
                raise ValueError(f"gyro value {g} outside +/-{GYRO_RANGE_DPS} dps")


def format_trace_line(sample: RawSample) -> str:
    """`t_ms,f1..f5,ax,ay,az,gx,gy,gz` with flex as ints, reals at 3 decimals."""
    fields = [str(sample.t_ms)]
    fields += [str(v) for v in sample.flex]
    fields += [f"{v:.3f}" for v in sample.accel]
    fields += [f"{v:.3f}" for v in sample.gyro]
    return ",".join(fields)


def parse_trace_line(line: str) -> RawSample:
    """Inverse of format_trace_line. Raises ValueError on any malformed field."""
    parts = line.strip().split(",")
    if len(parts) != 12:
        raise ValueError(f"expected 12 fields, got {len(parts)}")
    t_ms = int(parts[0])
    flex = tuple(int(p) for p in parts[1:6])
    accel = tuple(float(p) for p in parts[6:9])
    gyro = tuple(float(p) for p in parts[9:12])
    sample = RawSample(t_ms=t_ms, flex=flex, accel=accel, gyro=gyro)
    sample.validate()
    return sample


def write_trace(samples: Iterable[RawSample], path: str | Path) -> int:
    """Write one sample per line; returns the number of lines written."""
    count = 0
    with open(path, "w", encoding="ascii") as fh:
        for sample in samples:
            fh.write(format_trace_line(sample) + "\n")
            count += 1
    return count


def read_trace(path: str | Path, *, skip_malformed: bool = False) -> list[RawSample]:
    """Read a trace file.

    With skip_malformed, bad lines (and samples that break the strictly
    increasing t_ms rule) are dropped with a single summary warning;
    otherwise the first bad line raises ValueError.
    """
    samples: list[RawSample] = []
    skipped = 0
    last_t: int | None = None
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                sample = parse_trace_line(line)
                if last_t is not None and sample.t_ms <= last_t:
                    raise ValueError("t_ms not strictly increasing")
            except ValueError as exc:
                if not skip_malformed:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc
                skipped += 1
                continue
            samples.append(sample)
            last_t = sample.t_ms
    if skipped:
        logger.warning("%s: skipped %d malformed trace line(s)", path, skipped)
    return samples
