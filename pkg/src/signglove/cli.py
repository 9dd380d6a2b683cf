"""Command-line entry point.

Subcommands wire the pipeline stages together: simulate (script -> trace),
calibrate (config trace -> calibration file), run (trace -> emissions),
train/eval (corpus <-> model), serve (line protocol over TCP for external
clients), and export-templates (motion presets as JSON for UIs).

Exit codes: 0 ok, 2 usage, 3 missing prerequisite, 4 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
import threading
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np

from .calibration import (
    ClusterCollapse,
    GloveCalibration,
    TraceTooShort,
    calibrate,
    load_calibration,
    save_calibration,
)
from .codemap import ALPHABET_CODES
from .encoding import (
    EncodedFrame,
    MalformedFrame,
    RawFrame,
    encode_frame,
    format_emission,
    parse_wire_line,
)
from .features import WindowSpec
from .recognizer import RecognizerParams, StreamRecognizer
from .samples import FINGER_NAMES, RawSample, parse_trace_line, read_trace, write_trace
from .scripts import (
    UnknownGesture,
    alphabet_hold_script,
    export_presets,
    rest_script,
    shake_script,
    spell_script,
    word_script,
)
from .simulator import (
    GestureScript,
    InvalidScript,
    SensorProfile,
    config_phase_script,
    load_profile,
    synthesize,
)
from .tree import (
    MalformedModel,
    SchemaMismatch,
    TreeParams,
    load_model_file,
    save_model_file,
)
from .words import (
    CorpusError,
    WORD_CLASSES,
    build_training_set,
    encode_trace,
    evaluate_windows,
    load_corpus,
    make_word_classifier,
    synthesize_corpus,
    train_word_model,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_DATA = 4

FRAME_PERIOD_MS = 50  # nominal cadence used to timestamp network frames


class UsageError(ValueError):
    """Bad subcommand arguments (exit 2)."""


class MissingPrerequisite(RuntimeError):
    """A required input (calibration, file, port) is unavailable (exit 3)."""


class PhaseError(RuntimeError):
    """Operation attempted outside its legal session phase."""


def parse_duration_ms(text: str) -> float:
    """Accepts '750', '750ms' or '2s'."""
    text = text.strip()
    try:
        if text.endswith("ms"):
            return float(text[:-2])
        if text.endswith("s"):
            return float(text[:-1]) * 1000.0
        return float(text)
    except ValueError:
        raise UsageError(f"bad duration {text!r}") from None


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value ASCII config; '#' starts a comment line.

    Keys are validated against the known settings so a typo fails loudly
    instead of silently keeping a default threshold.
    """
    config: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key = key.strip()
        if key not in _DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown setting {key!r}")
        config[key] = value.strip()
    return config


_DEFAULTS = {
    "rate_hz": "20",
    "seed": "0",
    "host": "127.0.0.1",
    "port": "7600",
    "gyro_var_threshold": "400",
    "digit_var_threshold": "0.25",
    "mode_majority_fraction": "0.8",
    "rearm_var_threshold": "400",
    "max_depth": "8",
    "min_leaf": "5",
}


class Settings:
    """Flag > config file > default, per key."""

    def __init__(self, args: argparse.Namespace):
        self._args = args
        config_path = getattr(args, "config", None)
        self._config = load_config_file(config_path) if config_path else {}

    def _raw(self, key: str) -> Optional[str]:
        flag = getattr(self._args, key, None)
        if flag is not None:
            return str(flag)
        if key in self._config:
            return self._config[key]
        return _DEFAULTS.get(key)

    def text(self, key: str) -> Optional[str]:
        return self._raw(key)

    def real(self, key: str) -> float:
        raw = self._raw(key)
        assert raw is not None, key
        return float(raw)

    def integer(self, key: str) -> int:
        raw = self._raw(key)
        assert raw is not None, key
        return int(raw)

    def recognizer_params(self) -> RecognizerParams:
        return RecognizerParams(
            gyro_var_threshold=self.real("gyro_var_threshold"),
            digit_var_threshold=self.real("digit_var_threshold"),
            mode_majority_fraction=self.real("mode_majority_fraction"),
            rearm_var_threshold=self.real("rearm_var_threshold"),
        )

    def profile(self) -> SensorProfile:
        path = self.text("profile")
        profile = load_profile(path) if path else SensorProfile()
        return profile.with_seed(self.integer("seed"))


def recognize_trace(
    samples: Sequence[RawSample],
    cal: GloveCalibration,
    model=None,
    params: RecognizerParams = RecognizerParams(),
    spec: WindowSpec = WindowSpec(),
):
    """Full host loop over an in-memory trace; returns the emission list."""
    classifier = make_word_classifier(model, spec) if model is not None else None
    recognizer = StreamRecognizer(params=params, word_classifier=classifier)
    emissions = []
    for frame in encode_trace(samples, cal):
        emissions.extend(recognizer.push(frame))
    emissions.extend(recognizer.flush())
    return emissions


# --- session phase machine -------------------------------------------------


class Phase(Enum):
    INIT = "init"
    CONFIGURING = "configuring"
    RUNNING = "running"


class Session:
    """One client's Init -> Configuring -> Running lifecycle.

    Owns the config-phase sample pool, the calibration, and the
    recognizer; serve mode drives it line by line.
    """

    def __init__(
        self,
        params: RecognizerParams = RecognizerParams(),
        spec: WindowSpec = WindowSpec(),
        model=None,
    ):
        self.phase = Phase.INIT
        self.params = params
        self.spec = spec
        self.model = model
        self.cal: Optional[GloveCalibration] = None
        self.recognizer: Optional[StreamRecognizer] = None
        self._config_samples: list[RawSample] = []

    def begin_configuring(self) -> None:
        if self.phase is not Phase.INIT:
            raise PhaseError(f"cannot enter configuring from {self.phase.value}")
        self.phase = Phase.CONFIGURING

    def add_config_sample(self, frame: RawFrame) -> None:
        if self.phase is not Phase.CONFIGURING:
            raise PhaseError(f"config samples not accepted in {self.phase.value}")
        self._config_samples.append(
            RawSample(
                t_ms=frame.seq * FRAME_PERIOD_MS,
                flex=frame.flex,
                accel=frame.accel,
                gyro=frame.gyro,
            )
        )

    def run_calibration(self) -> GloveCalibration:
        if self.phase is not Phase.CONFIGURING:
            raise PhaseError("calibration only runs while configuring")
        cal = calibrate(self._config_samples)
        self.enter_running(cal)
        return cal

    def enter_running(self, cal: GloveCalibration) -> None:
        if self.phase is not Phase.CONFIGURING:
            raise PhaseError(f"cannot enter running from {self.phase.value}")
        self.cal = cal
        classifier = (
            make_word_classifier(self.model, self.spec) if self.model is not None else None
        )
        self.recognizer = StreamRecognizer(params=self.params, word_classifier=classifier)
        self.phase = Phase.RUNNING
        self._config_samples = []

    def push_encoded(self, frame: EncodedFrame):
        if self.phase is not Phase.RUNNING or self.recognizer is None:
            raise PhaseError("encoded frames only accepted while running")
        return self.recognizer.push(frame)

    def push_raw_running(self, frame: RawFrame):
        if self.phase is not Phase.RUNNING or self.cal is None:
            raise PhaseError("raw frames in running phase require calibration")
        sample = RawSample(
            t_ms=frame.seq * FRAME_PERIOD_MS,
            flex=frame.flex,
            accel=frame.accel,
            gyro=frame.gyro,
        )
        return self.recognizer.push(encode_frame(sample, self.cal, frame.seq))

    # --- wire protocol ----

    def handle_line(self, line: bytes) -> list[str]:
        """One inbound protocol line -> zero or more response lines."""
        stripped = line.strip()
        if not stripped:
            return []
        if stripped.startswith(b"CMD;"):
            return self._handle_command(stripped)
        try:
            frame = parse_wire_line(stripped)
        except MalformedFrame:
            return ["ERR;malformed\n"]
        if isinstance(frame, EncodedFrame):
            if self.phase is not Phase.RUNNING:
                return ["ERR;not-calibrated\n"]
            return [format_emission(e) for e in self.push_encoded(frame)]
        if self.phase is Phase.CONFIGURING:
            self.add_config_sample(frame)
            return []
        if self.phase is Phase.RUNNING:
            return [format_emission(e) for e in self.push_raw_running(frame)]
        return ["ERR;bad-phase\n"]

    def _handle_command(self, line: bytes) -> list[str]:
        if line == b"CMD;calibrate":
            if self.phase is not Phase.CONFIGURING:
                return ["ERR;bad-phase\n"]
            try:
                self.run_calibration()
            except ClusterCollapse as exc:
                finger = exc.finger if exc.finger else "unknown"
                return [f"CAL;err;{finger}\n"]
            except TraceTooShort:
                return ["CAL;err;short\n"]
            return ["CAL;ok\n"]
        return ["ERR;unknown-command\n"]

    def finish(self) -> list[str]:
        """End of input: flush any open word segment."""
        if self.recognizer is None:
            return []
        return [format_emission(e) for e in self.recognizer.flush()]


# --- subcommands -------------------------------------------------------------


def _build_script(spec_text: str, settings: Settings, hold_ms: float, shake_ms: float) -> GestureScript:
    kind, _, arg = spec_text.partition(":")
    rng = np.random.default_rng(settings.integer("seed"))
    if kind == "alphabet":
        return alphabet_hold_script(arg, hold_ms)
    if kind == "word":
        return word_script(arg, rng)
    if kind == "shake":
        return shake_script(hold_ms, rng)
    if kind == "rest":
        return rest_script(hold_ms)
    if kind == "spell":
        return spell_script(list(arg), hold_ms, shake_ms, rng)
    if kind == "config":
        return config_phase_script(settings.profile())
    raise UsageError(f"unknown script {spec_text!r}")


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    hold_ms = parse_duration_ms(args.hold)
    shake_ms = parse_duration_ms(args.shake)
    script = _build_script(args.script, settings, hold_ms, shake_ms)
    samples = synthesize(script, settings.profile(), settings.real("rate_hz"))
    n = write_trace(samples, args.out)
    print(f"{n} samples -> {args.out}")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    samples = read_trace(args.trace, skip_malformed=True)
    try:
        cal = calibrate(samples)
    except ClusterCollapse as exc:
        finger = exc.finger if exc.finger else "unknown"
        print(f"calibration failed: finger {finger} lacks bend range", file=sys.stderr)
        return EXIT_DATA
    except TraceTooShort as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    save_calibration(cal, args.out)
    for name, finger in zip(FINGER_NAMES, cal.fingers):
        c = ",".join(f"{v:.1f}" for v in finger.centroids)
        print(f"{name}: {c}")
    print(f"calibration -> {args.out}")
    return EXIT_OK


def _require_calibration(path: Optional[str]) -> GloveCalibration:
    if not path:
        raise MissingPrerequisite(
            "no calibration: complete the configuring phase first "
            "(signglove calibrate) and pass --calibration"
        )
    return load_calibration(path)


def cmd_run(args: argparse.Namespace) -> int:
    settings = Settings(args)
    cal = _require_calibration(settings.text("calibration"))
    model_path = settings.text("model")
    model = load_model_file(model_path) if model_path else None
    if args.trace == "-":
        samples = _read_trace_stream(sys.stdin)
    else:
        samples = read_trace(args.trace, skip_malformed=True)
    emissions = recognize_trace(
        samples, cal, model, settings.recognizer_params()
    )
    for emission in emissions:
        sys.stdout.write(format_emission(emission))
    sys.stdout.flush()
    return EXIT_OK


def _read_trace_stream(stream: TextIO) -> list[RawSample]:
    samples = []
    dropped = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        try:
            samples.append(parse_trace_line(line))
        except ValueError:
            dropped += 1
    if dropped:
        logger.warning("dropped %d malformed trace lines", dropped)
    return samples


def cmd_train(args: argparse.Namespace) -> int:
    settings = Settings(args)
    cal = _require_calibration(settings.text("calibration"))
    corpus = Path(args.corpus)
    if args.synthesize:
        synthesize_corpus(
            corpus,
            windows_per_class=args.windows_per_class,
            seed=settings.integer("seed"),
            rate_hz=settings.real("rate_hz"),
        )
    X, y = build_training_set(corpus, cal)
    params = TreeParams(
        max_depth=settings.integer("max_depth"), min_leaf=settings.integer("min_leaf")
    )
    holdout = args.holdout
    report = ""
    if holdout > 0:
        from sklearn.model_selection import train_test_split

        X_tr, X_te, y_tr, y_te = train_test_split(
            X,
            y,
            test_size=holdout,
            stratify=y,
            random_state=settings.integer("seed"),
        )
        probe = train_word_model(X_tr, y_tr, params)
        report = f";holdout_acc={evaluate_windows(probe, X_te, y_te):.4f}"
    model = train_word_model(X, y, params)
    save_model_file(model, args.out)
    print(f"TRAIN;n={len(X)};train_acc={evaluate_windows(model, X, y):.4f}{report}")
    print(f"model -> {args.out}")
    return EXIT_OK


# eval corpora may be labeled with word classes or static letters
_EVAL_LABELS = WORD_CLASSES + tuple(sorted(ALPHABET_CODES))


def _trace_prediction(emissions) -> str:
    texts = [e.text for e in emissions]
    if not texts:
        return "none"
    if all(t == texts[0] for t in texts):
        return texts[0]
    return "!mixed"


def cmd_eval(args: argparse.Namespace) -> int:
    settings = Settings(args)
    cal = _require_calibration(settings.text("calibration"))
    model_path = settings.text("model")
    model = load_model_file(model_path) if model_path else None
    entries = load_corpus(args.corpus, allowed_labels=_EVAL_LABELS)
    params = settings.recognizer_params()

    hits = 0
    per_label: dict[str, dict[str, int]] = {}
    for path, label in entries:
        samples = read_trace(path, skip_malformed=True)
        predicted = _trace_prediction(recognize_trace(samples, cal, model, params))
        for name in (label, predicted):
            per_label.setdefault(name, {"tp": 0, "fp": 0, "fn": 0, "n": 0})
        per_label[label]["n"] += 1
        if predicted == label:
            hits += 1
            per_label[label]["tp"] += 1
        else:
            per_label[label]["fn"] += 1
            per_label[predicted]["fp"] += 1

    for name in sorted(per_label):
        row = per_label[name]
        if row["n"] == 0 and row["fp"] == 0:
            continue
        precision = row["tp"] / (row["tp"] + row["fp"]) if row["tp"] + row["fp"] else 0.0
        recall = row["tp"] / row["n"] if row["n"] else 0.0
        print(f"LABEL;{name};precision={precision:.4f};recall={recall:.4f};n={row['n']}")
    print(f"EVAL;acc={hits / len(entries):.4f};n={len(entries)}")
    return EXIT_OK


def cmd_export_templates(args: argparse.Namespace) -> int:
    settings = Settings(args)
    document = export_presets(settings.real("rate_hz"))
    text = json.dumps(document, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="ascii")
        print(f"presets -> {args.out}")
    return EXIT_OK


# --- serve -------------------------------------------------------------------


def _handle_client(conn: socket.socket, session: Session) -> None:
    try:
        reader = conn.makefile("rb")
        for line in reader:
            for response in session.handle_line(line):
                conn.sendall(response.encode("ascii"))
        for response in session.finish():
            conn.sendall(response.encode("ascii"))
    except (BrokenPipeError, ConnectionResetError):
        logger.warning("client connection dropped")
    finally:
        try:
            conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        conn.close()


def cmd_serve(args: argparse.Namespace) -> int:
    settings = Settings(args)
    cal_path = settings.text("calibration")
    cal = load_calibration(cal_path) if cal_path else None
    model_path = settings.text("model")
    model = load_model_file(model_path) if model_path else None
    params = settings.recognizer_params()

    try:
        server = socket.create_server(
            (settings.text("host"), settings.integer("port"))
        )
    except OSError as exc:
        raise MissingPrerequisite(f"cannot bind port: {exc}") from exc

    host, port = server.getsockname()[:2]
    print(f"SERVE;host={host};port={port}", flush=True)

    busy = threading.Lock()

    def run_session(conn: socket.socket) -> None:
        try:
            session = Session(params=params, model=model)
            session.begin_configuring()
            if cal is not None:
                session.enter_running(cal)
            _handle_client(conn, session)
        finally:
            busy.release()

    try:
        while True:
            conn, _ = server.accept()
            if not busy.acquire(blocking=False):
                # The glove pairs with one host at a time.
                try:
                    conn.sendall(b"ERR;busy\n")
                finally:
                    conn.close()
                continue
            worker = threading.Thread(target=run_session, args=(conn,), daemon=True)
            worker.start()
            if args.once:
                worker.join()
                break
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signglove",
        description="Flex-sensor glove gesture pipeline: simulate, calibrate, recognize.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--rate-hz", dest="rate_hz", type=float, help="frame rate (default 20)")

    p = sub.add_parser("simulate", help="render a gesture script to a trace file")
    common(p)
    p.add_argument("script", help="alphabet:<letter> | word:<label> | spell:<letters> | shake | rest | config")
    p.add_argument("--out", required=True, help="trace file to write")
    p.add_argument("--hold", default="2s", help="hold/duration (e.g. 2s, 1500ms)")
    p.add_argument("--shake", default="1s", help="shake length between spelled letters")
    p.add_argument("--profile", help="sensor profile file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="learn per-finger bend states from a config trace")
    common(p)
    p.add_argument("--trace", required=True, help="configuration-phase trace file")
    p.add_argument("--out", required=True, help="calibration file to write")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("run", help="recognize a trace and print OUT lines")
    common(p)
    p.add_argument("--trace", required=True, help="trace file, or - for stdin")
    p.add_argument("--calibration", help="calibration file (required)")
    p.add_argument("--model", help="word model (.dtree); alphabet-only if omitted")
    for key in ("gyro_var_threshold", "digit_var_threshold", "mode_majority_fraction", "rearm_var_threshold"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train", help="train the word-gesture tree from a corpus")
    common(p)
    p.add_argument("--corpus", required=True, help="corpus directory with manifest.txt")
    p.add_argument("--calibration", help="calibration file (required)")
    p.add_argument("--out", required=True, help="model file to write (.dtree)")
    p.add_argument("--synthesize", action="store_true", help="generate the corpus first if absent")
    p.add_argument("--windows-per-class", type=int, default=220)
    p.add_argument("--holdout", type=float, default=0.0, help="fraction held out for a report")
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-leaf", dest="min_leaf", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="end-to-end accuracy over a labeled corpus")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--calibration", help="calibration file (required)")
    p.add_argument("--model", help="word model (.dtree)")
    for key in ("gyro_var_threshold", "digit_var_threshold", "mode_majority_fraction", "rearm_var_threshold"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="speak the line protocol over TCP")
    common(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int, help="0 picks a free port (default 7600)")
    p.add_argument("--calibration", help="preload calibration (skip configuring)")
    p.add_argument("--model", help="word model (.dtree)")
    p.add_argument("--once", action="store_true", help="exit after the first client session")
    for key in ("gyro_var_threshold", "digit_var_threshold", "mode_majority_fraction", "rearm_var_threshold"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-templates", help="motion presets as JSON")
    common(p)
    p.add_argument("--out", default="-", help="output file, or - for stdout")
    p.set_defaults(func=cmd_export_templates)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, UnknownGesture) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingPrerequisite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_MISSING
    except (
        CorpusError,
        InvalidScript,
        MalformedFrame,
        MalformedModel,
        SchemaMismatch,
        TraceTooShort,
        ClusterCollapse,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
