"""Flex-sensor glove gesture pipeline.

Simulated glove traces in, recognized letters and words out: calibration
by 1-D clustering, finger-state encoding, buffered stream recognition,
and a decision-tree word classifier, plus a line protocol for external
clients.
"""

from .calibration import (
    ClusterCollapse,
    FingerCalibration,
    FlexQuantizer,
    GloveCalibration,
    TraceTooShort,
    calibrate,
    kmeans3,
    load_calibration,
    quantize_flex,
    quantize_orientation,
    save_calibration,
)
from .codemap import ALPHABET_CODES, build_code_map
from .encoding import (
    EncodedFrame,
    Emission,
    MalformedFrame,
    RawFrame,
    encode_frame,
    format_emission,
    gesture_code,
    parse_emission,
    parse_frame,
    parse_raw_frame,
    parse_wire_line,
    serialize_frame,
    serialize_raw_frame,
)
from .features import (
    TooFewFrames,
    WindowSpec,
    extract_features,
    first_difference,
    sliding_windows,
)
from .recognizer import (
    BufferNotFull,
    RecognizerParams,
    Route,
    StreamRecognizer,
    buffer_stats,
    discriminate,
    mode_code,
    push_frame,
)
from .samples import RawSample, read_trace, write_trace
from .scripts import (
    alphabet_hold_script,
    export_presets,
    shake_script,
    spell_script,
    word_script,
)
from .simulator import (
    GestureScript,
    InvalidScript,
    Keyframe,
    SensorProfile,
    chain_scripts,
    config_phase_script,
    load_profile,
    save_profile,
    synthesize,
)
from .tree import (
    DecisionTreeModel,
    EmptyDataset,
    GestureTreeClassifier,
    MalformedModel,
    SchemaMismatch,
    TreeParams,
    load_model,
    load_model_file,
    predict,
    save_model,
    save_model_file,
    train,
)
from .words import (
    WORD_CLASSES,
    build_training_set,
    classify_stream,
    make_word_classifier,
    synthesize_corpus,
    train_word_model,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHABET_CODES",
    "BufferNotFull",
    "ClusterCollapse",
    "DecisionTreeModel",
    "EncodedFrame",
    "Emission",
    "EmptyDataset",
    "FingerCalibration",
    "FlexQuantizer",
    "GestureScript",
    "GestureTreeClassifier",
    "GloveCalibration",
    "InvalidScript",
    "Keyframe",
    "MalformedFrame",
    "MalformedModel",
    "RawFrame",
    "RawSample",
    "RecognizerParams",
    "Route",
    "SchemaMismatch",
    "SensorProfile",
    "StreamRecognizer",
    "TooFewFrames",
    "TraceTooShort",
    "TreeParams",
    "WORD_CLASSES",
    "WindowSpec",
    "alphabet_hold_script",
    "buffer_stats",
    "build_code_map",
    "build_training_set",
    "calibrate",
    "chain_scripts",
    "classify_stream",
    "config_phase_script",
    "discriminate",
    "encode_frame",
    "export_presets",
    "extract_features",
    "first_difference",
    "format_emission",
    "gesture_code",
    "kmeans3",
    "load_calibration",
    "load_model",
    "load_model_file",
    "load_profile",
    "make_word_classifier",
    "mode_code",
    "parse_emission",
    "parse_frame",
    "parse_raw_frame",
    "parse_wire_line",
    "predict",
    "push_frame",
    "quantize_flex",
    "quantize_orientation",
    "read_trace",
    "save_calibration",
    "save_model",
    "save_model_file",
    "save_profile",
    "serialize_frame",
    "serialize_raw_frame",
    "shake_script",
    "sliding_windows",
    "spell_script",
    "synthesize",
    "synthesize_corpus",
    "train",
    "train_word_model",
    "word_script",
    "write_trace",
]
