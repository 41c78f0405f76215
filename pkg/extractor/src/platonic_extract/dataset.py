"""Dataset manifests: JSON lines, one item per line.

Each line is an object with ``item_id``, ``captions`` (non-empty list of
strings in annotator order), and exactly one of ``video_path`` (a decodable
file) or ``frames`` (an ordered list of single-frame files).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DatasetError


@dataclass(frozen=True)
class DatasetItem:
    item_id: str
    captions: tuple[str, ...]
    video_path: str | None = None
    frames: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.item_id or not isinstance(self.item_id, str):
            raise DatasetError("item_id must be a non-empty string")
        if not self.captions:
            raise DatasetError(f"item {self.item_id!r} has no captions")
        if any(not isinstance(c, str) or not c for c in self.captions):
            raise DatasetError(f"item {self.item_id!r} has an empty caption")
        has_video = self.video_path is not None
        has_frames = len(self.frames) > 0
        if has_video == has_frames:
            raise DatasetError(
                f"item {self.item_id!r} must set exactly one of video_path or frames"
            )


def _parse_line(line: str, line_no: int) -> DatasetItem:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"line {line_no}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DatasetError(f"line {line_no}: expected an object")
    try:
        return DatasetItem(
            item_id=raw.get("item_id", ""),
            captions=tuple(raw.get("captions", ())),
            video_path=raw.get("video_path"),
            frames=tuple(raw.get("frames", ())),
        )
    except DatasetError as exc:
        raise DatasetError(f"line {line_no}: {exc}") from exc


def load_items(path: str | Path) -> list[DatasetItem]:
    """Parse a JSONL dataset manifest, enforcing unique item ids."""
    items = []
    seen = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            item = _parse_line(line, line_no)
            if item.item_id in seen:
                raise DatasetError(f"duplicate item_id {item.item_id!r} (line {line_no})")
            seen.add(item.item_id)
            items.append(item)
    if not items:
        raise DatasetError(f"dataset {path} contains no items")
    return items
