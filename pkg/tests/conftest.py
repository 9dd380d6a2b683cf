"""Shared fixtures: a quiet profile, a calibration, and a trained word model.

Corpus synthesis and model training run once per session; they take a
couple of seconds and several modules need them.
"""
from __future__ import annotations

import pytest

from signglove import (
    GloveCalibration,
    SensorProfile,
    build_training_set,
    calibrate,
    config_phase_script,
    save_calibration,
    synthesize,
    synthesize_corpus,
    train_word_model,
)
from signglove.tree import save_model_file


@pytest.fixture(scope="session")
def profile() -> SensorProfile:
    return SensorProfile(seed=101)


@pytest.fixture(scope="session")
def quiet_profile() -> SensorProfile:
    return SensorProfile(seed=101, noise_sigma_adc=0.0, accel_sigma_g=0.0, gyro_sigma_dps=0.0)


@pytest.fixture(scope="session")
def cal(profile: SensorProfile) -> GloveCalibration:
    trace = synthesize(config_phase_script(profile), profile)
    return calibrate(trace)


@pytest.fixture(scope="session")
def cal_file(cal, tmp_path_factory):
    path = tmp_path_factory.mktemp("cal") / "glove.cal"
    save_calibration(cal, path)
    return path


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, profile):
    out = tmp_path_factory.mktemp("corpus")
    synthesize_corpus(out, windows_per_class=220, seed=5, profile=profile)
    return out


@pytest.fixture(scope="session")
def word_model(corpus_dir, cal):
    X, y = build_training_set(corpus_dir, cal)
    return train_word_model(X, y)


@pytest.fixture(scope="session")
def word_model_file(word_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "words.dtree"
    save_model_file(word_model, path)
    return path
