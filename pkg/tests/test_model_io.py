"""Tests for the model file format."""

import struct

import numpy as np
import pytest

from engine.config_builder import TrainConfig
from engine.forest import predict_batch, train_forest
from engine.model_io import FORMAT_VERSION, MAGIC, ModelFormatError, load_model, save_model
from utils.sampling import generate_trunk


@pytest.fixture(scope='module')
def forest(trunk_small):
    config = TrainConfig(n_trees=5, seed=4, n_workers=1, bin_count=64, calibration_budget=0.05)
    return train_forest(trunk_small, config)


@pytest.fixture
def model_path(tmp_path, forest):
    path = tmp_path / 'models' / 'forest.bin'
    save_model(forest, path)
    return path


def test_round_trip_is_structurally_identical(forest, model_path):
    loaded = load_model(model_path)
    assert loaded == forest
    assert loaded.calibration is not None
    assert loaded.config.split_mode is forest.config.split_mode


def test_round_trip_predictions(forest, model_path):
    loaded = load_model(model_path)
    unseen = generate_trunk(1000, 10, seed=8)
    original_classes, original_votes = predict_batch(forest, unseen.columns)
    loaded_classes, loaded_votes = predict_batch(loaded, unseen.columns)
    np.testing.assert_array_equal(loaded_classes, original_classes)
    np.testing.assert_array_equal(loaded_votes, original_votes)


def test_header(model_path):
    blob = model_path.read_bytes()
    assert blob[:4] == MAGIC
    assert struct.unpack('>H', blob[4:6])[0] == FORMAT_VERSION


def test_wrong_magic(model_path):
    blob = bytearray(model_path.read_bytes())
    blob[:4] = b'NOPE'
    model_path.write_bytes(bytes(blob))
    with pytest.raises(ModelFormatError, match="magic"):
        load_model(model_path)


def test_version_mismatch(model_path):
    blob = bytearray(model_path.read_bytes())
    blob[4:6] = struct.pack('>H', FORMAT_VERSION + 1)
    model_path.write_bytes(bytes(blob))
    with pytest.raises(ModelFormatError, match="version"):
        load_model(model_path)


@pytest.mark.parametrize('keep', [3, 40, -10])
def test_truncated(model_path, keep):
    blob = model_path.read_bytes()
    model_path.write_bytes(blob[:keep])
    with pytest.raises(ModelFormatError, match="Truncated"):
        load_model(model_path)


def test_checksum(model_path):
    blob = bytearray(model_path.read_bytes())
    blob[-1] ^= 0xFF
    model_path.write_bytes(bytes(blob))
    with pytest.raises(ModelFormatError, match="checksum"):
        load_model(model_path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / 'absent.bin')
