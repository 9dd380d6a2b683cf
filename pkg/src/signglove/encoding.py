"""Run-phase frame encoding and the line-delimited ASCII wire protocol.

Grammar (7-bit ASCII, LF line endings, no spaces):

    E;<seq>;<d1><d2><d3><d4><d5><o>;<ax>,<ay>,<az>;<gx>,<gy>,<gz>
    R;<seq>;<f1>,<f2>,<f3>,<f4>,<f5>;<ax>,<ay>,<az>;<gx>,<gy>,<gz>

E-frames carry quantized state digits (1-3 per finger) plus the palm
orientation bit; R-frames carry raw flex ADC counts for the configuration
phase. seq is a decimal counter that wraps at 1,000,000. Reals are printed
with exactly 3 fractional digits. The same grammar is used over files,
pipes, and the serve socket.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .calibration import GloveCalibration, quantize_flex, quantize_orientation
from .samples import ACCEL_RANGE_G, ADC_MAX, GYRO_RANGE_DPS, RawSample

SEQ_MOD = 1_000_000
MAX_LINE_BYTES = 1024

_REAL = r"-?\d{1,4}\.\d{3}"
_E_RE = re.compile(
    rf"^E;(\d{{1,6}});([123]{{5}})([01])"
    rf";({_REAL}),({_REAL}),({_REAL});({_REAL}),({_REAL}),({_REAL})$"
)
_R_RE = re.compile(
    rf"^R;(\d{{1,6}});(\d{{1,4}}),(\d{{1,4}}),(\d{{1,4}}),(\d{{1,4}}),(\d{{1,4}})"
    rf";({_REAL}),({_REAL}),({_REAL});({_REAL}),({_REAL}),({_REAL})$"
)


class MalformedFrame(ValueError):
    """Line does not satisfy the wire grammar; receivers drop it and go on."""


@dataclass(frozen=True)
class EncodedFrame:
    """The run-phase wire unit: state digits plus raw IMU passthrough."""

    seq: int
    digits: tuple[int, int, int, int, int]
    orient: int
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]


@dataclass(frozen=True)
class RawFrame:
    """Configuration-phase wire unit: raw flex ADC counts."""

    seq: int
    flex: tuple[int, int, int, int, int]
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]


def encode_frame(sample: RawSample, cal: GloveCalibration, seq: int) -> EncodedFrame:
    """Quantize a raw sample against a calibration.

    Accel and gyro pass through unquantized; the word-gesture features are
    computed host-side from them.
    """
    digits = tuple(
        quantize_flex(raw, finger) for raw, finger in zip(sample.flex, cal.fingers)
    )
    return EncodedFrame(
        seq=seq % SEQ_MOD,
        digits=digits,
        orient=quantize_orientation(sample.accel),
        accel=sample.accel,
        gyro=sample.gyro,
    )


def gesture_code(frame: EncodedFrame) -> str:
    """6-char code: five finger digits (thumb..little) then orientation bit."""
    return "".join(str(d) for d in frame.digits) + str(frame.orient)


def _triplet(values: tuple[float, float, float]) -> str:
    return ",".join(f"{v:.3f}" for v in values)


def serialize_frame(frame: EncodedFrame) -> str:
    return (
        f"E;{frame.seq};{gesture_code(frame)};"
        f"{_triplet(frame.accel)};{_triplet(frame.gyro)}\n"
    )


def serialize_raw_frame(frame: RawFrame) -> str:
    flex = ",".join(str(v) for v in frame.flex)
    return f"R;{frame.seq};{flex};{_triplet(frame.accel)};{_triplet(frame.gyro)}\n"


def _clean_line(line: str | bytes) -> str:
    if isinstance(line, (bytes, bytearray)):
        if len(line) > MAX_LINE_BYTES:
            raise MalformedFrame("line too long")
        try:
            line = line.decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedFrame("not ASCII") from exc
    if len(line) > MAX_LINE_BYTES:
        raise MalformedFrame("line too long")
    return line.rstrip("\r\n")


def _check_reals(accel: tuple[float, ...], gyro: tuple[float, ...]) -> None:
    if any(abs(a) > ACCEL_RANGE_G for a in accel):
        raise MalformedFrame("accel out of range")
    if any(abs(g) > GYRO_RANGE_DPS for g in gyro):
        raise MalformedFrame("gyro out of range")


def parse_frame(line: str | bytes) -> EncodedFrame:
    """Parse an E-frame line; raises MalformedFrame on any grammar violation."""
    match = _E_RE.match(_clean_line(line))
    if not match:
        raise MalformedFrame("not a valid E-frame")
    seq = int(match.group(1))
    if seq >= SEQ_MOD:
        raise MalformedFrame("seq out of range")
    digits = tuple(int(c) for c in match.group(2))
    orient = int(match.group(3))
    accel = tuple(float(match.group(i)) for i in range(4, 7))
    gyro = tuple(float(match.group(i)) for i in range(7, 10))
    _check_reals(accel, gyro)
    return EncodedFrame(seq=seq, digits=digits, orient=orient, accel=accel, gyro=gyro)


def parse_raw_frame(line: str | bytes) -> RawFrame:
    """Parse an R-frame line; raises MalformedFrame on any grammar violation."""
    match = _R_RE.match(_clean_line(line))
    if not match:
        raise MalformedFrame("not a valid R-frame")
    seq = int(match.group(1))
    if seq >= SEQ_MOD:
        raise MalformedFrame("seq out of range")
    flex = tuple(int(match.group(i)) for i in range(2, 7))
    if any(v > ADC_MAX for v in flex):
        raise MalformedFrame("flex out of range")
    accel = tuple(float(match.group(i)) for i in range(7, 10))
    gyro = tuple(float(match.group(i)) for i in range(10, 13))
    _check_reals(accel, gyro)
    return RawFrame(seq=seq, flex=flex, accel=accel, gyro=gyro)


def parse_wire_line(line: str | bytes) -> EncodedFrame | RawFrame:
    """Dispatch on the leading tag; raises MalformedFrame for anything else."""
    cleaned = _clean_line(line)
    if cleaned.startswith("E;"):
        return parse_frame(cleaned)
    if cleaned.startswith("R;"):
        return parse_raw_frame(cleaned)
    raise MalformedFrame("unknown frame tag")


def seq_gap(prev_seq: int, seq: int) -> int:
    """Frames missing between two received seq values (0 when contiguous).

    Gap detection is advisory; the recognizer tolerates drops.
    """
    return (seq - prev_seq - 1) % SEQ_MOD


@dataclass(frozen=True)
class Emission:
    """One recognized gesture, written as `OUT;<kind>;<text>;<at_seq>`."""

    kind: str  # "alphabet" or "word"
    text: str
    at_seq: int

    def __post_init__(self):
        if self.kind not in ("alphabet", "word"):
            raise ValueError(f"bad emission kind: {self.kind}")
        if not self.text:
            raise ValueError("emission text must be non-empty")


def format_emission(emission: Emission) -> str:
    return f"OUT;{emission.kind};{emission.text};{emission.at_seq}\n"


_OUT_RE = re.compile(r"^OUT;(alphabet|word);([^;]+);(\d{1,6})$")


def parse_emission(line: str | bytes) -> Emission:
    match = _OUT_RE.match(_clean_line(line))
    if not match:
        raise MalformedFrame("not a valid OUT line")
    return Emission(kind=match.group(1), text=match.group(2), at_seq=int(match.group(3)))
