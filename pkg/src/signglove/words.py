"""Word-gesture pipeline.

Synthesizes the labeled motion corpus, assembles the 11-feature training
set, trains the decision tree, and classifies buffered motion segments
for the recognizer (majority vote over sliding windows).
"""

from __future__ import annotations

import errno
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .calibration import GloveCalibration
from .encoding import EncodedFrame, encode_frame
from .features import WindowSpec, extract_features, sliding_windows
from .samples import RawSample, read_trace, write_trace
from .scripts import NONE_LABEL, WORD_LABELS, none_script, word_script
from .simulator import SensorProfile, synthesize
from .tree import DecisionTreeModel, TreeParams, predict, train

WORD_CLASSES = WORD_LABELS + (NONE_LABEL,)
MANIFEST_NAME = "manifest.txt"


class CorpusError(ValueError):
    """Corpus directory is empty, inconsistent, or mislabeled."""


def _window_count(n_frames: int, window: int, shift: int) -> int:
    if n_frames < window:
        return 0
    return (n_frames - window) // shift + 1


def encode_trace(
    samples: Sequence[RawSample], cal: GloveCalibration, start_seq: int = 0
) -> list[EncodedFrame]:
    return [encode_frame(s, cal, start_seq + i) for i, s in enumerate(samples)]


def synthesize_corpus(
    out_dir: str | Path,
    windows_per_class: int = 220,
    seed: int = 0,
    profile: SensorProfile | None = None,
    rate_hz: float = 20.0,
    spec: WindowSpec = WindowSpec(),
) -> list[tuple[str, str]]:
    """Write randomized labeled traces plus a manifest; returns its entries.

    Keeps generating per class until the traces yield at least
    windows_per_class training windows under spec.
    """
    profile = profile or SensorProfile()
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries: list[tuple[str, str]] = []
    for label in WORD_CLASSES:
        windows = 0
        n = 0
        while windows < windows_per_class:
            script = (
                none_script(rng) if label == NONE_LABEL else word_script(label, rng)
            )
            trace_seed = int(rng.integers(0, 2**31))
            samples = synthesize(script, profile.with_seed(trace_seed), rate_hz)
            count = _window_count(len(samples), spec.sample_frames, spec.shift_frames)
            if count == 0:
                continue
            filename = f"{label}_{n:03d}.trace"
            write_trace(samples, out / filename)
            entries.append((filename, label))
            windows += count
            n += 1
    manifest = "".join(f"{name},{label}\n" for name, label in entries)
    (out / MANIFEST_NAME).write_text(manifest, encoding="ascii")
    return entries


def load_corpus(
    corpus_dir: str | Path,
    allowed_labels: Sequence[str] = WORD_CLASSES,
) -> list[tuple[Path, str]]:
    """Parse the manifest; every label must come from allowed_labels.

    An absent manifest raises FileNotFoundError (prerequisite not built
    yet); content problems raise CorpusError.
    """
    corpus = Path(corpus_dir)
    manifest = corpus / MANIFEST_NAME
    if not manifest.is_file():
        raise FileNotFoundError(errno.ENOENT, "no corpus manifest", str(manifest))
    entries: list[tuple[Path, str]] = []
    for lineno, line in enumerate(manifest.read_text(encoding="ascii").splitlines(), 1):
        if not line.strip():
            continue
        name, sep, label = line.partition(",")
        if not sep or label not in allowed_labels:
            raise CorpusError(f"{manifest}:{lineno}: unknown label {label!r}")
        path = corpus / name
        if not path.is_file():
            raise CorpusError(f"{manifest}:{lineno}: missing trace {name}")
        entries.append((path, label))
    if not entries:
        raise CorpusError(f"empty corpus manifest {manifest}")
    return entries


def build_training_set(
    corpus_dir: str | Path,
    cal: GloveCalibration,
    spec: WindowSpec = WindowSpec(),
) -> tuple[np.ndarray, np.ndarray]:
    """Corpus directory -> (features, labels) over training-length windows."""
    rows: list[np.ndarray] = []
    labels: list[str] = []
    for path, label in load_corpus(corpus_dir):
        frames = encode_trace(read_trace(path), cal)
        for window in sliding_windows(frames, spec, window_frames=spec.sample_frames):
            rows.append(extract_features(window))
            labels.append(label)
    return np.array(rows), np.array(labels, dtype=object)


def train_word_model(
    X: np.ndarray, y: np.ndarray, params: TreeParams = TreeParams()
) -> DecisionTreeModel:
    return train(X, y, params)


def evaluate_windows(model: DecisionTreeModel, X: np.ndarray, y: np.ndarray) -> float:
    """Plain accuracy of per-window predictions."""
    if len(X) == 0:
        raise CorpusError("nothing to evaluate")
    hits = sum(1 for row, label in zip(X, y) if predict(model, row)[0] == label)
    return hits / len(X)


def classify_windows(
    frames: Sequence[EncodedFrame],
    model: DecisionTreeModel,
    spec: WindowSpec = WindowSpec(),
) -> list[str]:
    """Per-window predictions over a motion segment.

    Segments shorter than one inference window are classified whole.
    """
    if len(frames) < spec.window_frames:
        if len(frames) < 2:
            return []
        windows: list[Sequence[EncodedFrame]] = [frames]
    else:
        windows = sliding_windows(frames, spec)
    return [predict(model, extract_features(w))[0] for w in windows]


def classify_stream(
    frames: Sequence[EncodedFrame],
    model: DecisionTreeModel,
    spec: WindowSpec = WindowSpec(),
) -> Optional[str]:
    """Majority non-"none" prediction for one motion segment, or None.

    Ties break toward the label seen in the earliest window.
    """
    labels = classify_windows(frames, model, spec)
    votes = [label for label in labels if label != NONE_LABEL]
    if not votes:
        return None
    counts = Counter(votes)
    first_seen = {}
    for i, label in enumerate(votes):
        first_seen.setdefault(label, i)
    return max(counts, key=lambda l: (counts[l], -first_seen[l]))


def make_word_classifier(model: DecisionTreeModel, spec: WindowSpec = WindowSpec()):
    """Bind a model into the callback shape the recognizer accepts."""

    def classifier(frames: Sequence[EncodedFrame]) -> Optional[str]:
        return classify_stream(frames, model, spec)

    return classifier
