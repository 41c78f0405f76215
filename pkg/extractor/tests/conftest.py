import json

import numpy as np
import pytest

from platonic_extract.models import ToyVisionEncoder, register
from platonic_extract.video import write_frame_stack

# a registry entry with a long native clip, used by segment-layout tests
register(
    "toy/vision-clip16",
    lambda mid: ToyVisionEncoder(mid, dim=8, hidden_layers=1, native_clip_len=16,
                                 has_class_token=False),
)


def make_dataset(root, rng, n_items=5, total_frames=12, size=4, captions=4,
                 frames_for=()):
    """Write frame stacks plus a JSONL manifest; returns the manifest path.

    Items listed in frames_for are stored as per-frame files instead of one
    stack, covering both dataset source shapes.
    """
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / "dataset.jsonl"
    with open(manifest, "w", encoding="utf-8") as handle:
        for i in range(n_items):
            item_id = f"clip-{i:03d}"
            stack = rng.uniform(0.0, 1.0, size=(total_frames, size, size, 3)).astype(np.float32)
            record = {
                "item_id": item_id,
                "captions": [f"clip {i} view {a} drifting slowly" for a in range(captions)],
            }
            if item_id in frames_for:
                paths = []
                for t in range(total_frames):
                    path = root / f"{item_id}-f{t}.npy"
                    np.save(path, stack[t], allow_pickle=False)
                    paths.append(str(path))
                record["frames"] = paths
            else:
                path = root / f"{item_id}.npy"
                write_frame_stack(path, stack)
                record["video_path"] = str(path)
            handle.write(json.dumps(record) + "\n")
    return manifest


@pytest.fixture
def dataset(tmp_path):
    rng = np.random.default_rng(42)
    return make_dataset(tmp_path / "data", rng)
