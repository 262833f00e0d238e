"""Synthetic dataset construction and on-disk round-trips."""

import numpy as np
import pytest

from specdenoise.dataset import (
    DESK_COUNT,
    DESK_SHAPE,
    PAPER_COUNT,
    PAPER_SHAPE,
    build_synthetic,
    load_dataset,
    save_dataset,
    to_spectrogram_images,
)
from specdenoise.errors import DataError, InvalidParamError


class TestBuild:
    def test_count_shape_and_range(self):
        entries = build_synthetic(6, (16, 16, 1), seed=2)
        assert len(entries) == 6
        for e in entries:
            assert e.pixels.shape == (16, 16, 1)
            assert e.pixels.min() >= 0.0 and e.pixels.max() <= 1.0

    def test_ids_are_stable_and_unique(self):
        entries = build_synthetic(5, (16, 16, 1), seed=2)
        assert [e.image_id for e in entries] == [f"img_{i:04d}" for i in range(5)]
        assert len({e.source for e in entries}) >= 1

    def test_deterministic_per_seed(self):
        a = build_synthetic(3, (16, 16, 1), seed=4)
        b = build_synthetic(3, (16, 16, 1), seed=4)
        c = build_synthetic(3, (16, 16, 1), seed=5)
        for x, y in zip(a, b):
            assert np.array_equal(x.pixels, y.pixels)
        assert not np.array_equal(a[0].pixels, c[0].pixels)

    def test_images_differ_from_each_other(self):
        entries = build_synthetic(4, (16, 16, 1), seed=6)
        assert not np.array_equal(entries[0].pixels, entries[1].pixels)

    def test_desk_and_full_scale_constants(self):
        assert DESK_COUNT == 48 and DESK_SHAPE == (64, 64, 1)
        assert PAPER_COUNT == 75 and PAPER_SHAPE == (256, 256, 3)

    def test_three_channel_build(self):
        entries = build_synthetic(2, (16, 16, 3), seed=7)
        assert entries[0].pixels.shape == (16, 16, 3)

    def test_count_validation(self):
        with pytest.raises(InvalidParamError):
            build_synthetic(0, (16, 16, 1), seed=0)


class TestRoundTrip:
    def test_save_load_bit_exact(self, tmp_path):
        entries = build_synthetic(4, (16, 16, 1), seed=8)
        save_dataset(entries, tmp_path)
        assert (tmp_path / "manifest.csv").exists()
        loaded = load_dataset(tmp_path)
        assert len(loaded) == 4
        for a, b in zip(entries, loaded):
            assert a.image_id == b.image_id
            assert a.source == b.source
            assert a.offset == b.offset
            assert np.array_equal(a.pixels, b.pixels)

    def test_manifest_lists_every_image(self, tmp_path):
        entries = build_synthetic(3, (16, 16, 1), seed=9)
        save_dataset(entries, tmp_path)
        lines = (tmp_path / "manifest.csv").read_text().strip().splitlines()
        assert len(lines) == 4  # header + 3 rows
        assert lines[0].startswith("id,")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DataError):
            load_dataset(tmp_path / "nope")

    def test_missing_image_file(self, tmp_path):
        entries = build_synthetic(2, (16, 16, 1), seed=10)
        save_dataset(entries, tmp_path)
        (tmp_path / "images" / "img_0001.npy").unlink()
        with pytest.raises(DataError):
            load_dataset(tmp_path)

    def test_to_spectrogram_images(self):
        entries = build_synthetic(2, (16, 16, 1), seed=11)
        images = to_spectrogram_images(entries)
        assert len(images) == 2
        assert images[0].source_id == entries[0].source
        assert np.array_equal(images[0].pixels, entries[0].pixels)
