"""Extraction drivers: datasets + encoders in, archives out."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import DatasetItem
from .errors import ConfigError, DatasetError, DecodeError, ModelError
from .models import load_model
from .pooling import POOLINGS, pool
from .video import decode_item, plan_segments
from .writer import write_archive
from .captions import select_captions

log = logging.getLogger("platonic_extract")


@dataclass(frozen=True)
class ExtractionConfig:
    """Everything that decides archive contents, recorded in the manifest."""

    model_id: str
    modality: str
    pooling: str = "token_mean"
    n_o: int = 1                       # native sub-clip length (vision)
    frame_plan: tuple[int, ...] = ()   # frame budgets the archive must serve (vision)
    n_c: int = 1                       # captions concatenated per item (text)
    caption_seed: int = 0              # seed for the single-caption draw
    batch_size: int = 8

    def __post_init__(self):
        if self.modality not in ("vision", "text"):
            raise ConfigError(f"modality must be vision or text, got {self.modality!r}")
        if self.pooling not in POOLINGS:
            raise ConfigError(f"pooling must be one of {POOLINGS}, got {self.pooling!r}")
        if not isinstance(self.n_o, int) or self.n_o < 1:
            raise ConfigError(f"n_o must be a positive int, got {self.n_o!r}")
        if not isinstance(self.n_c, int) or self.n_c < 1:
            raise ConfigError(f"n_c must be a positive int, got {self.n_c!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive int, got {self.batch_size!r}")
        if self.modality == "vision":
            if not self.frame_plan:
                raise ConfigError("vision extraction needs a non-empty frame_plan")
            for n_f in self.frame_plan:
                if not isinstance(n_f, int) or n_f < 1:
                    raise ConfigError(f"frame_plan entries must be positive ints, got {n_f!r}")
                if n_f % self.n_o != 0:
                    raise ConfigError(
                        f"frame_plan entry {n_f} is not a multiple of n_o = {self.n_o}"
                    )


@dataclass(frozen=True)
class ExtractionResult:
    path: Path
    item_ids: tuple[str, ...]
    skipped: tuple[str, ...] = field(default=())


def _check_model(config: ExtractionConfig):
    model = load_model(config.model_id)
    if model.modality != config.modality:
        raise ModelError(
            f"{config.model_id} is a {model.modality} model, config says {config.modality}"
        )
    if config.pooling == "class_token" and not model.has_class_token:
        raise ConfigError(f"{config.model_id} has no class token; use token_mean")
    return model


def extract_vision(config: ExtractionConfig, items: list[DatasetItem],
                   out_dir: str | Path, allow_skip: bool = False) -> ExtractionResult:
    """Encode every item's sub-clips and write one vision archive.

    The archive stores S = max(frame_plan) / n_o segments per item so any
    budget in the plan is a segment prefix. An undecodable item aborts the
    whole archive unless allow_skip, in which case it is logged and dropped.
    """
    if config.modality != "vision":
        raise ConfigError("extract_vision needs a vision config")
    model = _check_model(config)
    if config.n_o != model.native_clip_len:
        raise ConfigError(
            f"config n_o = {config.n_o} but {config.model_id} processes "
            f"{model.native_clip_len}-frame clips"
        )
    n_f_max = max(config.frame_plan)
    segment_count = n_f_max // config.n_o

    kept_ids, kept_features, skipped = [], [], []
    for item in items:
        try:
            stack = decode_item(item)
            clips = plan_segments(stack, n_f_max, config.n_o)
        except DecodeError as exc:
            if not allow_skip:
                raise DecodeError(
                    f"item {item.item_id!r} is undecodable and would leave a partial "
                    f"archive; re-run with allow_skip to drop it ({exc})"
                ) from exc
            log.warning("skipping undecodable item %s: %s", item.item_id, exc)
            skipped.append(item.item_id)
            continue
        per_segment = []
        for clip in clips:
            states = model.encode_clip(clip)
            per_segment.append([pool(s, config.pooling, model.has_class_token) for s in states])
        # [S][L][D] -> [L, S, D]
        kept_features.append(np.transpose(np.asarray(per_segment, dtype=np.float64), (1, 0, 2)))
        kept_ids.append(item.item_id)

    if not kept_ids:
        raise DatasetError("no decodable items; nothing to write")
    tensor = np.stack(kept_features, axis=1)  # [L, N, S, D]
    assert tensor.shape[2] == segment_count
    path = write_archive(
        out_dir,
        model_id=config.model_id,
        modality="vision",
        item_ids=kept_ids,
        tensor=tensor,
        variant={
            "n_o": config.n_o,
            "frame_plan": list(config.frame_plan),
            "pooling": config.pooling,
        },
    )
    return ExtractionResult(path, tuple(kept_ids), tuple(skipped))


def extract_text(config: ExtractionConfig, items: list[DatasetItem],
                 out_dir: str | Path) -> ExtractionResult:
    """Encode each item's selected captions as one string; one archive per n_c.

    Captions are joined by a single space in annotator order. n_c = 1 draws
    one caption per item with a seeded choice (seed in the manifest); larger
    n_c takes the first n_c captions.
    """
    if config.modality != "text":
        raise ConfigError("extract_text needs a text config")
    model = _check_model(config)

    ids, features = [], []
    for item in items:
        selected = select_captions(item, config.n_c, config.caption_seed)
        states = model.encode_text(" ".join(selected))
        pooled = [pool(s, config.pooling, model.has_class_token) for s in states]
        features.append(np.asarray(pooled, dtype=np.float64)[:, None, :])  # [L, 1, D]
        ids.append(item.item_id)

    tensor = np.stack(features, axis=1)  # [L, N, 1, D]
    path = write_archive(
        out_dir,
        model_id=config.model_id,
        modality="text",
        item_ids=ids,
        tensor=tensor,
        variant={
            "n_c": config.n_c,
            "caption_seed": config.caption_seed,
            "join": "space",
            "pooling": config.pooling,
        },
    )
    return ExtractionResult(path, tuple(ids))
