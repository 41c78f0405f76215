"""Archive emission.

Output is the analysis toolkit's on-disk interchange format: a directory
holding manifest.json and embeddings.bin, the latter little-endian float32,
layer-major [layers][items][segments][dim] with no header or padding. This
module writes that format from its documented description; it deliberately
does not depend on the analysis package.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, ExtractError

MANIFEST_NAME = "manifest.json"
TENSOR_NAME = "embeddings.bin"
DTYPE_TAG = "f32le"


def write_archive(out_dir: str | Path, *, model_id: str, modality: str,
                  item_ids: list[str], tensor: np.ndarray, variant: dict) -> Path:
    """Write one archive directory; tensor is [layers, items, segments, dim]."""
    tensor = np.asarray(tensor)
    if tensor.ndim != 4:
        raise ConfigError(f"tensor must be 4-D [L, N, S, D], got shape {tensor.shape}")
    layers, items, segments, dim = (int(v) for v in tensor.shape)
    if items != len(item_ids):
        raise ConfigError(f"{len(item_ids)} item_ids for {items} tensor rows")
    if min(layers, items, segments, dim) < 1:
        raise ConfigError(f"all tensor axes must be non-empty, got shape {tensor.shape}")
    if not np.all(np.isfinite(tensor)):
        raise ConfigError("tensor contains non-finite values")

    manifest = {
        "model_id": model_id,
        "modality": modality,
        "item_count": items,
        "layer_count": layers,
        "dim": dim,
        "segment_count": segments,
        "item_ids": list(item_ids),
        "variant": dict(variant),
        "dtype": DTYPE_TAG,
    }
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        tensor.astype("<f4").tofile(out_dir / TENSOR_NAME)
    except OSError as exc:
        raise ExtractError(f"cannot write archive at {out_dir}: {exc}") from exc
    return out_dir
