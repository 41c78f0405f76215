"""On-disk embedding archive: layer-major tensor store plus JSON manifest.

An archive directory holds exactly two files:

* ``manifest.json`` — UTF-8 JSON with the fields of :class:`ArchiveManifest`.
* ``embeddings.bin`` — raw little-endian float32, laid out ``[L][N][S][D]``
  (layer-major, row-major within a layer), no header, no padding.

Layer l occupies byte offsets ``[l*N*S*D*4, (l+1)*N*S*D*4)``, so a single
layer can be streamed without touching the rest of the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from platonic_align.errors import (
    ArchiveIOError,
    DataError,
    DimensionError,
    FormatError,
    LayerIndexError,
)

MANIFEST_NAME = "manifest.json"
TENSOR_NAME = "embeddings.bin"
_DTYPE = "f32le"
_ITEM_BYTES = 4

_MODALITIES = ("vision", "text")

# Manifest fields that are written; unknown fields in a file are ignored on
# read but never round-tripped.
_MANIFEST_FIELDS = (
    "model_id",
    "modality",
    "item_count",
    "layer_count",
    "dim",
    "segment_count",
    "variant",
    "dtype",
    "item_ids",
)


@dataclass
class ArchiveManifest:
    """Metadata describing one embedding archive."""

    model_id: str
    modality: str
    item_count: int
    layer_count: int
    dim: int
    segment_count: int
    item_ids: list[str]
    variant: dict = field(default_factory=dict)
    dtype: str = _DTYPE

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.modality not in _MODALITIES:
            raise FormatError(f"modality must be one of {_MODALITIES}, got {self.modality!r}")
        for name in ("item_count", "layer_count", "dim", "segment_count"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise FormatError(f"{name} must be an integer >= 1, got {value!r}")
        if self.dtype != _DTYPE:
            raise FormatError(f"dtype must be {_DTYPE!r}, got {self.dtype!r}")
        if len(self.item_ids) != self.item_count:
            raise FormatError(
                f"item_ids has {len(self.item_ids)} entries, expected item_count={self.item_count}"
            )
        if len(set(self.item_ids)) != len(self.item_ids):
            raise FormatError("item_ids contains duplicates")

    @property
    def layer_size_bytes(self) -> int:
        return self.item_count * self.segment_count * self.dim * _ITEM_BYTES

    @property
    def tensor_size_bytes(self) -> int:
        return self.layer_count * self.layer_size_bytes

    def to_json(self) -> str:
        payload = {name: getattr(self, name) for name in _MANIFEST_FIELDS}
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ArchiveManifest":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"manifest is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise FormatError("manifest JSON must be an object")
        missing = [name for name in _MANIFEST_FIELDS if name not in raw]
        if missing:
            raise FormatError(f"manifest missing fields: {', '.join(missing)}")
        kwargs = {name: raw[name] for name in _MANIFEST_FIELDS}
        return cls(**kwargs)


@dataclass(frozen=True)
class SegmentedMatrix:
    """One layer of an archive: per-item, per-segment features, shape [N, S, D]."""

    data: np.ndarray
    layer_index: int


def write_archive(manifest: ArchiveManifest, tensor: np.ndarray, path: str | Path) -> None:
    """Write ``manifest.json`` and ``embeddings.bin`` under ``path``.

    ``tensor`` must have shape [L, N, S, D] matching the manifest and contain
    only finite values. Re-reading the directory yields the tensor bit-exactly
    (after the float32 cast applied here).
    """
    tensor = np.asarray(tensor)
    expected = (
        manifest.layer_count,
        manifest.item_count,
        manifest.segment_count,
        manifest.dim,
    )
    if tensor.shape != expected:
        raise DimensionError(f"tensor shape {tensor.shape} does not match manifest {expected}")
    if not np.isfinite(tensor).all():
        raise DataError("tensor contains non-finite values")

    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / MANIFEST_NAME).write_text(manifest.to_json() + "\n", encoding="utf-8")
        tensor.astype("<f4", copy=False).tofile(directory / TENSOR_NAME)
    except OSError as exc:
        raise ArchiveIOError(f"cannot write archive at {directory}: {exc}") from exc


class Archive:
    """Read handle over an archive directory; layers are loaded lazily.

    Handles are read-only: any number of them (or threads sharing one) may
    load layers concurrently, each load opening the tensor file independently.
    """

    def __init__(self, manifest: ArchiveManifest, path: Path):
        self.manifest = manifest
        self.path = path
        self._tensor_path = path / TENSOR_NAME

    @property
    def identifier(self) -> str:
        return self.path.name

    def load_layer(self, layer: int) -> SegmentedMatrix:
        return load_layer(self, layer)

    def __repr__(self) -> str:  # pragma: no cover
        m = self.manifest
        return (
            f"Archive({self.identifier!r}, model={m.model_id!r}, N={m.item_count}, "
            f"L={m.layer_count}, S={m.segment_count}, D={m.dim})"
        )


def open_archive(path: str | Path) -> Archive:
    """Open and validate an archive directory, returning a lazy read handle."""
    directory = Path(path)
    manifest_path = directory / MANIFEST_NAME
    tensor_path = directory / TENSOR_NAME
    if not manifest_path.is_file():
        raise ArchiveIOError(f"missing {MANIFEST_NAME} in {directory}")
    if not tensor_path.is_file():
        raise ArchiveIOError(f"missing {TENSOR_NAME} in {directory}")

    manifest = ArchiveManifest.from_json(manifest_path.read_text(encoding="utf-8"))

    actual = tensor_path.stat().st_size
    if actual != manifest.tensor_size_bytes:
        raise FormatError(
            f"{TENSOR_NAME} holds {actual} bytes, expected {manifest.tensor_size_bytes} "
            f"(L*N*S*D*4 = {manifest.layer_count}*{manifest.item_count}"
            f"*{manifest.segment_count}*{manifest.dim}*4)"
        )
    return Archive(manifest, directory)


def load_layer(archive: Archive, layer: int) -> SegmentedMatrix:
    """Load layer ``layer`` as a read-only [N, S, D] float32 array."""
    m = archive.manifest
    if not isinstance(layer, (int, np.integer)) or isinstance(layer, bool):
        raise LayerIndexError(f"layer must be an integer, got {layer!r}")
    if not 0 <= layer < m.layer_count:
        raise LayerIndexError(f"layer {layer} out of range [0, {m.layer_count})")

    count = m.item_count * m.segment_count * m.dim
    try:
        with open(archive._tensor_path, "rb") as fh:
            fh.seek(layer * m.layer_size_bytes)
            flat = np.fromfile(fh, dtype="<f4", count=count)
    except OSError as exc:
        raise ArchiveIOError(f"cannot read {archive._tensor_path}: {exc}") from exc
    if flat.size != count:
        raise FormatError(
            f"short read on layer {layer}: got {flat.size} values, expected {count}"
        )
    if not np.isfinite(flat).all():
        raise DataError(f"layer {layer} contains non-finite values")

    data = flat.reshape(m.item_count, m.segment_count, m.dim)
    data.flags.writeable = False
    return SegmentedMatrix(data=data, layer_index=int(layer))


def paired(a: Archive, b: Archive) -> bool:
    """True iff the two archives list identical item_ids element-wise."""
    return a.manifest.item_ids == b.manifest.item_ids


def first_pairing_mismatch(a: Archive, b: Archive) -> str:
    """Describe the first item_ids discrepancy between two archives."""
    ids_a, ids_b = a.manifest.item_ids, b.manifest.item_ids
    if len(ids_a) != len(ids_b):
        return f"item counts differ: {len(ids_a)} vs {len(ids_b)}"
    for i, (x, y) in enumerate(zip(ids_a, ids_b)):
        if x != y:
            return f"item_ids differ at position {i}: {x!r} vs {y!r}"
    return "item_ids are identical"
