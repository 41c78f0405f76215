"""Archive format: manifest validation, round-trips, and malformed rejects."""

import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from platonic_align.archive import (
    Archive,
    ArchiveManifest,
    first_pairing_mismatch,
    open_archive,
    paired,
    write_archive,
)
from platonic_align.errors import (
    ArchiveIOError,
    DataError,
    DimensionError,
    FormatError,
    LayerIndexError,
)
from conftest import build_archive, random_archive


def tiny_manifest(**overrides):
    fields = dict(
        model_id="toy-encoder",
        modality="vision",
        item_count=2,
        layer_count=1,
        dim=3,
        segment_count=1,
        item_ids=["a", "b"],
    )
    fields.update(overrides)
    return ArchiveManifest(**fields)


class TestManifest:
    def test_json_round_trip(self):
        manifest = tiny_manifest(variant={"n_f": 16, "pooling": "class_token"})
        clone = ArchiveManifest.from_json(manifest.to_json())
        assert clone == manifest

    def test_unknown_fields_ignored_on_read(self):
        raw = json.loads(tiny_manifest().to_json())
        raw["future_field"] = {"nested": True}
        manifest = ArchiveManifest.from_json(json.dumps(raw))
        assert manifest == tiny_manifest()
        # and never written back out
        assert "future_field" not in manifest.to_json()

    def test_missing_field_rejected(self):
        raw = json.loads(tiny_manifest().to_json())
        del raw["dim"]
        with pytest.raises(FormatError, match="dim"):
            ArchiveManifest.from_json(json.dumps(raw))

    def test_invalid_json_rejected(self):
        with pytest.raises(FormatError):
            ArchiveManifest.from_json("not json {")
        with pytest.raises(FormatError):
            ArchiveManifest.from_json("[1, 2]")

    def test_dtype_must_be_f32le(self):
        with pytest.raises(FormatError, match="f32le"):
            tiny_manifest(dtype="f64le")

    def test_modality_restricted(self):
        with pytest.raises(FormatError):
            tiny_manifest(modality="audio")

    def test_counts_must_be_positive_integers(self):
        with pytest.raises(FormatError):
            tiny_manifest(layer_count=0)
        with pytest.raises(FormatError):
            tiny_manifest(dim=-1)

    def test_item_ids_unique_and_sized(self):
        with pytest.raises(FormatError, match="duplicates"):
            tiny_manifest(item_ids=["a", "a"])
        with pytest.raises(FormatError):
            tiny_manifest(item_ids=["a", "b", "c"])

    def test_size_accounting(self):
        manifest = tiny_manifest()
        assert manifest.layer_size_bytes == 2 * 1 * 3 * 4
        assert manifest.tensor_size_bytes == 24


class TestRoundTrip:
    def test_tiny_archive_size(self, tmp_path):
        archive = build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        assert (tmp_path / "a" / "embeddings.bin").stat().st_size == 24
        assert archive.manifest.item_count == 2

    def test_random_round_trips_bit_exact(self, tmp_path):
        rng = np.random.default_rng(42)
        for trial in range(20):
            shape = tuple(int(v) for v in rng.integers(1, 5, size=4))
            tensor = rng.standard_normal(shape).astype(np.float32)
            archive = build_archive(tmp_path / f"rt-{trial}", tensor)
            for layer in range(shape[0]):
                loaded = archive.load_layer(layer)
                assert loaded.layer_index == layer
                assert loaded.data.dtype == np.float32
                assert np.array_equal(loaded.data, tensor[layer])

    def test_layer_offsets_are_layer_major(self, tmp_path):
        # each layer filled with its own constant: offset bugs would mix them
        tensor = np.stack([np.full((3, 2, 4), float(l)) for l in range(5)])
        archive = build_archive(tmp_path / "layers", tensor)
        for l in range(5):
            assert np.all(archive.load_layer(l).data == l)

    def test_loaded_layer_is_read_only(self, tmp_path):
        archive = build_archive(tmp_path / "ro", np.zeros((1, 2, 1, 3)))
        data = archive.load_layer(0).data
        with pytest.raises(ValueError):
            data[0, 0, 0] = 1.0

    def test_repeated_loads_identical(self, tmp_path):
        rng = np.random.default_rng(7)
        archive = random_archive(tmp_path / "rep", rng, layers=3)
        first = archive.load_layer(1).data
        second = archive.load_layer(1).data
        assert np.array_equal(first, second)

    def test_concurrent_loads_match_serial(self, tmp_path):
        rng = np.random.default_rng(11)
        archive = random_archive(tmp_path / "conc", rng, n=16, layers=6, dim=8)
        serial = [archive.load_layer(l).data for l in range(6)]
        with ThreadPoolExecutor(max_workers=6) as pool:
            parallel = list(pool.map(lambda l: archive.load_layer(l).data, range(6)))
        for a, b in zip(serial, parallel):
            assert np.array_equal(a, b)


class TestWriteErrors:
    def test_shape_mismatch(self, tmp_path):
        with pytest.raises(DimensionError):
            write_archive(tiny_manifest(), np.zeros((1, 2, 1, 4), dtype=np.float32), tmp_path / "x")

    def test_non_finite_rejected(self, tmp_path):
        tensor = np.zeros((1, 2, 1, 3), dtype=np.float32)
        tensor[0, 0, 0, 0] = np.nan
        with pytest.raises(DataError):
            write_archive(tiny_manifest(), tensor, tmp_path / "x")

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        with pytest.raises(ArchiveIOError):
            write_archive(tiny_manifest(), np.zeros((1, 2, 1, 3), dtype=np.float32), blocker)


class TestOpenErrors:
    def test_missing_manifest(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(ArchiveIOError, match="manifest.json"):
            open_archive(tmp_path / "empty")

    def test_missing_tensor_file(self, tmp_path):
        build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        (tmp_path / "a" / "embeddings.bin").unlink()
        with pytest.raises(ArchiveIOError, match="embeddings.bin"):
            open_archive(tmp_path / "a")

    def test_truncated_tensor_names_sizes(self, tmp_path):
        build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        path = tmp_path / "a" / "embeddings.bin"
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError) as err:
            open_archive(tmp_path / "a")
        assert "20" in str(err.value) and "24" in str(err.value)

    def test_oversized_tensor_rejected(self, tmp_path):
        build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        path = tmp_path / "a" / "embeddings.bin"
        path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
        with pytest.raises(FormatError):
            open_archive(tmp_path / "a")

    def test_wrong_dtype_rejected(self, tmp_path):
        build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        manifest_path = tmp_path / "a" / "manifest.json"
        raw = json.loads(manifest_path.read_text())
        raw["dtype"] = "f64le"
        manifest_path.write_text(json.dumps(raw))
        with pytest.raises(FormatError, match="f32le"):
            open_archive(tmp_path / "a")

    def test_corrupt_manifest_rejected(self, tmp_path):
        build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        (tmp_path / "a" / "manifest.json").write_text("{broken")
        with pytest.raises(FormatError):
            open_archive(tmp_path / "a")


class TestLoadLayer:
    def test_layer_bounds(self, tmp_path):
        archive = build_archive(tmp_path / "a", np.zeros((2, 2, 1, 3)))
        with pytest.raises(LayerIndexError):
            archive.load_layer(2)
        with pytest.raises(LayerIndexError):
            archive.load_layer(-1)
        with pytest.raises(LayerIndexError):
            archive.load_layer("0")

    def test_non_finite_payload_rejected(self, tmp_path):
        archive = build_archive(tmp_path / "a", np.zeros((1, 2, 1, 3)))
        payload = np.full(6, np.inf, dtype="<f4")
        (tmp_path / "a" / "embeddings.bin").write_bytes(payload.tobytes())
        with pytest.raises(DataError):
            archive.load_layer(0)


class TestPairing:
    def test_identical_ids_pair(self, tmp_path):
        a = build_archive(tmp_path / "a", np.zeros((1, 3, 1, 2)), item_ids=["x", "y", "z"])
        b = build_archive(tmp_path / "b", np.ones((2, 3, 1, 5)), item_ids=["x", "y", "z"])
        assert paired(a, b)

    def test_mismatch_reported_with_position(self, tmp_path):
        a = build_archive(tmp_path / "a", np.zeros((1, 3, 1, 2)), item_ids=["x", "y", "z"])
        b = build_archive(tmp_path / "b", np.zeros((1, 3, 1, 2)), item_ids=["x", "q", "z"])
        assert not paired(a, b)
        message = first_pairing_mismatch(a, b)
        assert "position 1" in message and "'q'" in message

    def test_length_mismatch_reported(self, tmp_path):
        a = build_archive(tmp_path / "a", np.zeros((1, 3, 1, 2)))
        b = build_archive(tmp_path / "b", np.zeros((1, 2, 1, 2)))
        assert "counts differ" in first_pairing_mismatch(a, b)
