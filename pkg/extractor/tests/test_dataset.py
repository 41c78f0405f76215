import json

import numpy as np
import pytest

from platonic_extract.dataset import DatasetItem, load_items
from platonic_extract.errors import DatasetError

from conftest import make_dataset


class TestDatasetItem:
    def test_video_item_valid(self):
        item = DatasetItem("a", ("one cap",), video_path="a.npy")
        assert item.frames == ()

    def test_frames_item_valid(self):
        item = DatasetItem("a", ("one cap",), frames=("f0.npy", "f1.npy"))
        assert item.video_path is None

    def test_needs_captions(self):
        with pytest.raises(DatasetError, match="no captions"):
            DatasetItem("a", (), video_path="a.npy")

    def test_rejects_empty_caption(self):
        with pytest.raises(DatasetError, match="empty caption"):
            DatasetItem("a", ("fine", ""), video_path="a.npy")

    def test_needs_exactly_one_source(self):
        with pytest.raises(DatasetError, match="exactly one"):
            DatasetItem("a", ("cap",))
        with pytest.raises(DatasetError, match="exactly one"):
            DatasetItem("a", ("cap",), video_path="a.npy", frames=("f.npy",))

    def test_needs_item_id(self):
        with pytest.raises(DatasetError, match="item_id"):
            DatasetItem("", ("cap",), video_path="a.npy")


class TestLoadItems:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(42)
        manifest = make_dataset(tmp_path / "d", rng, n_items=4, frames_for=("clip-002",))
        items = load_items(manifest)
        assert [i.item_id for i in items] == [f"clip-{i:03d}" for i in range(4)]
        assert items[2].frames and items[2].video_path is None
        assert items[0].video_path and not items[0].frames
        assert all(len(i.captions) == 4 for i in items)

    def test_caption_order_preserved(self, tmp_path):
        manifest = tmp_path / "d.jsonl"
        manifest.write_text(json.dumps(
            {"item_id": "a", "video_path": "a.npy", "captions": ["z last", "a first"]}
        ) + "\n")
        assert load_items(manifest)[0].captions == ("z last", "a first")

    def test_duplicate_ids_rejected(self, tmp_path):
        manifest = tmp_path / "d.jsonl"
        line = json.dumps({"item_id": "a", "video_path": "a.npy", "captions": ["cap"]})
        manifest.write_text(line + "\n" + line + "\n")
        with pytest.raises(DatasetError, match="duplicate item_id 'a'"):
            load_items(manifest)

    def test_invalid_json_names_line(self, tmp_path):
        manifest = tmp_path / "d.jsonl"
        manifest.write_text('{"item_id": "a"\n')
        with pytest.raises(DatasetError, match="line 1"):
            load_items(manifest)

    def test_non_object_line_rejected(self, tmp_path):
        manifest = tmp_path / "d.jsonl"
        manifest.write_text('[1, 2]\n')
        with pytest.raises(DatasetError, match="expected an object"):
            load_items(manifest)

    def test_empty_dataset_rejected(self, tmp_path):
        manifest = tmp_path / "d.jsonl"
        manifest.write_text("\n\n")
        with pytest.raises(DatasetError, match="no items"):
            load_items(manifest)

    def test_blank_lines_skipped(self, tmp_path):
        manifest = tmp_path / "d.jsonl"
        manifest.write_text(
            "\n" + json.dumps({"item_id": "a", "video_path": "a.npy", "captions": ["c"]}) + "\n\n"
        )
        assert len(load_items(manifest)) == 1
